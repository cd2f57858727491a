from setuptools import setup
setup(
  name = 'causalicm',
  packages = ['causalicm', 'causalicm.estimators', 'causalicm.docs'],
  package_data = {'causalicm': ['docs/docs_template.md']},
  scripts = ['causalicm/docs/make_docs.py'],
  entry_points = {'console_scripts': ['causalicm = causalicm.cli:main']},
  version = '1.0',
  description = 'Conditional treatment effects from a randomized trial and an observational '
                'study with a multi-task Gaussian process.',
  license = 'MIT',
  author = 'The causalicm developers',
  keywords = ['causal inference', 'gaussian process', 'treatment effects', 'coregionalization'],
  classifiers = [],
  python_requires = '>=3.8',
  install_requires = ['numpy>=1.17', 'scipy>=1.7'],
  extras_require = {'test': ['pytest']},
)
