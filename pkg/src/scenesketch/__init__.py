"""scenesketch: text-conditioned scene layout and stroke sketch generation.

Pipeline: a transformer layout composer places labeled bounding boxes from a
text prompt, a recurrent stroke sketcher draws each object at the box's
aspect ratio, and an assembler scales the strokes into the boxes and renders
the scene as SVG.  Includes an evaluation harness (Monte-Carlo overlap
metrics, relational-correctness checks, heatmaps), a CLI, and an HTTP
service for interactive, user-steerable generation.
"""

__version__ = "0.1.0"
