try:
    from setuptools import setup
    from setuptools import find_packages
    packages = find_packages(exclude=('tests',))
except ImportError:
    from distutils.core import setup
    import os
    packages = [x.strip('./').replace('/','.') for x in os.popen('find hdkit -name "__init__.py" | xargs -n1 dirname').read().strip().split('\n')]

if bytes is str:
    raise Exception("This module is designed for python 3 only. Please install an older version to use python 2.")

setup(
    name='hdkit',
    description='Design, simulation and characterization of quantum-noise-limited balanced homodyne detectors.',
    version='0.1.0',
    python_requires='>=3.8',
    packages=packages,
    package_data={'hdkit': ['presets/*.ini']},
    install_requires=[
        'numpy>=1.20',
        'scipy>=1.6',
        'sortedcontainers>=2.0',
    ],
    extras_require={
        'test': ['pytest'],
    },
    entry_points={
        'console_scripts': ['hdkit = hdkit.cli:main'],
    },
)
