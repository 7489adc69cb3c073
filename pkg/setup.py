from setuptools import setup


def readme():
    with open("README.rst") as f:
        return f.read()


exec(open('offloadsim/core/version.py', 'r').read())


setup(name='offloadsim',
      version=__version__,
      description="Simulating GNN inference offloading across edge servers",
      long_description=readme(),
      classifiers=[
          'Development Status :: 3 - Alpha',
          'License :: OSI Approved :: MIT License',
          'Programming Language :: Python :: 3.7',
          'Programming Language :: Python :: 3.8',
          'Programming Language :: Python :: 3 :: Only',
          'Topic :: Scientific/Engineering'
      ],
      license='MIT',
      packages=["offloadsim.core"],
      install_requires=[
          'numpy'
      ],
      entry_points={
          'console_scripts': ['sim = offloadsim.core.cli:main']
      },
      setup_requires=['pytest-runner'],
      test_suite='tests',
      tests_require=['pytest', 'hypothesis', 'networkx', 'scipy>=1.7'],
      python_requires='>=3.7',
      include_package_data=True,
      zip_safe=False)
