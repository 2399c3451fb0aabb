from setuptools import setup

setup(
    name='ivt',
    version='0.1.0',
    packages=['ivt'],
    install_requires=["numpy", "scipy"],
    extras_require={
        "dev": ["pytest", "pytest-cov"],
    },
    entry_points={
        "console_scripts": ["ivt=ivt.cli:main"],
    })
