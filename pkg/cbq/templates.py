"""The Jinja environment used to render run summaries ([`jinja_env`]).

Templates are loaded from the `cbq/templates` package directory.
A [strict undefined][1] is enabled, so a summary referencing a missing value fails
instead of rendering an empty string.

[1]: https://jinja.palletsprojects.com/en/2.11.x/api/#undefined-types
"""
__all__ = ['jinja_env', 'template', 'render_summary']

import math
from typing import Sequence

from jinja2 import Environment, PackageLoader, StrictUndefined, Template

jinja_env = Environment(
    loader=PackageLoader('cbq', 'templates'),
    lstrip_blocks=True,
    trim_blocks=True,
    undefined=StrictUndefined,
)
jinja_env.filters['rmse'] = lambda value: 'n/a' if math.isnan(value) else f'{value:.4g}'


def template(name: str) -> Template:
    """A shorthand for loading a template from the package templates directory."""
    return jinja_env.get_template(name)


def render_summary(medians: Sequence, config: str, *, title: str, failed: int, total: int) -> str:
    """Markdown table of median RMSE per `(method, N, T)` followed by the effective configuration."""
    rows = sorted(medians, key=lambda m: (m.method, m.N, m.T))
    return template('summary.md.j2').render(title=title, medians=rows, config=config, failed=failed, total=total)
