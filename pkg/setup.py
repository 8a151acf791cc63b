from setuptools import setup, find_packages

import cbq


def readme():
    with open('README.md', 'r', encoding='utf8') as f:
        return f.read()


setup(
    name='conditional-bq',
    version=cbq.__version__,
    packages=find_packages(exclude=('tests*',)),
    package_data={'cbq': ['py.typed', 'templates/*.j2']},
    entry_points={
        'console_scripts': [
            'cbq = cbq.cli:main',
        ],
    },
    zip_safe=False,
    description='Conditional Bayesian quadrature for parametric expectations, with benchmarks.',
    long_description=readme(),
    long_description_content_type='text/markdown',
    license='MIT',
    keywords="bayesian-quadrature gaussian-process monte-carlo probabilistic-numerics",
    python_requires=">=3.10",
    install_requires=[
        'numpy>=1.24',
        'scipy>=1.10',
        'Jinja2==3.1.2',
        'python-slugify~=3.0.3',
    ],
    classifiers=[
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Development Status :: 3 - Alpha",
        "License :: OSI Approved :: MIT License",
        "Natural Language :: English",
        "Operating System :: MacOS :: MacOS X",
        "Operating System :: POSIX :: Linux",
        "Operating System :: Microsoft :: Windows",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: Implementation :: CPython",
        "Typing :: Typed",
    ],
)
