# -*- coding: utf-8 -*-
"""
setup.py - boilerplate
"""
import sys
from setuptools import setup
from setuptools.command.test import test as TestCommand

class PyTest(TestCommand):
    user_options = [('pytest-args=', 'a', "Arguments to pass to pytest")]

    def initialize_options(self):
        TestCommand.initialize_options(self)
        self.pytest_args = []

    def run_tests(self):
        import shlex
        import pytest

        if not self.pytest_args:
            targs = []
        else:
            targs = shlex.split(self.pytest_args)

        errno = pytest.main(targs)
        sys.exit(errno)

def readme():
    with open('README.md') as f:
        return f.read()

INSTALL_REQUIRES = [
    'numpy',
    'scipy',
    'numba',
    'pandas',
    'matplotlib',
]

###############
## RUN SETUP ##
###############

# run setup.
version = "0.0.0"
setup(
    name='qlattice',
    version=version,
    description=(
        "q-binomial (Kemp) Cox-Ross-Rubinstein lattices: distributions, "
        "pricers, continuous-time limits and convergence checks"
    ),
    long_description=readme(),
    long_description_content_type="text/markdown",
    classifiers=[
        'Development Status :: 3 - Alpha',
        'License :: OSI Approved :: MIT License',
        "Intended Audience :: Science/Research",
        "Intended Audience :: Financial and Insurance Industry",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
    ],
    keywords='option pricing, binomial tree, q-binomial',
    license='MIT',
    packages=[
        'qlattice',
    ],
    install_requires=INSTALL_REQUIRES,
    entry_points={
        'console_scripts': [
            'qlattice = qlattice.cli:main',
        ],
    },
    tests_require=['pytest',],
    cmdclass={'test':PyTest},
    include_package_data=True,
    zip_safe=False,
)
