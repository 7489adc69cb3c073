from .layout import GraphLayout, GraphEvent, new_layout, apply_event, apply_events, active_degree
from .partition import Partition, CutTrace, layer_cut, hicut, cut_edge_count
from .flow import mincut_partition
from .scenario import Scenario, CostConstants, ScenarioParams, build_scenario
from .costs import OffloadDecision, CostBreakdown, system_cost, cross_server_cost, check
from .gcn import gcn_forward
from .env import reset, observe, global_state, resolve_decision, step
from .agents import Hyperparams, make_agents, drl_only_variant, select_action, train_step, run_episode
from .baselines import greedy_offload, random_offload
from .ptom import make_policy, ptom_train, ptom_offload
from .datasets import CitationGraph, load_citation_graph, task_size_from_dim, sample_scenario
from .generators import gen_synthetic
from .config import ExperimentConfig, load_config
from .version import __version__
