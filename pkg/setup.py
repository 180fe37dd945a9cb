import os
from setuptools import setup, find_packages


def read(fname):
    return open(os.path.join(os.path.dirname(__file__), fname)).read()

setup(
    name='varcast',
    version='0.1.0',
    author='Thomas Sileo',
    author_email='thomas.sileo@gmail.com',
    description='Characterization and forecasting of multivariate VoIP QoS/QoE traces',
    license='MIT',
    keywords='voip qos var forecasting time series impulse response',
    packages=find_packages(exclude=['ez_setup', 'tests', 'tests.*']),
    long_description=read('README.rst'),
    python_requires='>=3.8',
    install_requires=['docopt', 'requests', 'simplejson', 'numpy>=1.20', 'scipy',
                      'pandas>=1.5', 'scikit-learn', 'statsmodels>=0.13'],
    test_suite="varcast.tests",
    entry_points={'console_scripts': ['varcast = varcast.cli:main']},
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: System :: Networking :: Monitoring",
        "Topic :: Scientific/Engineering :: Information Analysis",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
    ],
    zip_safe=False,
)
