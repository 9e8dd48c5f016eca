"""Nested signed-distance shells: volumetric reference rendering, shell
baking to textured meshes, and sorting-free layered compositing."""

__version__ = "0.1.0"
