"""adflow: a headless engine for visual algorithmic-design definitions.

Definitions are typed dataflow graphs. They can be read from and written to
an XML dialect, evaluated into triangle meshes, and served to collaborating
clients over a compact binary protocol with pluggable conflict handling.
"""

__version__ = "0.1.0"
