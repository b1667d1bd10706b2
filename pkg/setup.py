#!/usr/bin/env python

from setuptools import setup

setup(name='metagame_lab',
      version='0.1',
      description='Stackelberg benchmarks, learner simulations and meta-game equilibrium audits for repeated Bayesian games',
      packages=['metagame_lab', 'metagame_lab.learners'],
      install_requires=[
          'joblib>=1.2',
          'numpy>=1.22',
          'requests>=2.9.1',
          'tornado>=6.0',
          'traitlets>=5.0',
      ],
      extras_require={
          'test': ['pytest>=7', 'hypothesis>=6', 'jsonschema>=4'],
      },
      entry_points={
          'console_scripts': ['metagame = metagame_lab.cli:main'],
      },
     )
