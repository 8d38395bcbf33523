"""Minimal graphs in H^2 x R: Scherk solutions, extrinsic curvature and the curvature bound.

Modules
-------
hypgeom    hyperbolic plane charts, isometries, geodesics and Scherk domains
meshing    triangulations of Scherk quadrilaterals, quadrants and truncated disks
solver     P1 minimisation of the hyperbolic area functional (capped Scherk data)
transinv   closed-form translation-invariant entire graphs ``v_t``
curvature  normals, second fundamental form, extrinsic curvature and theta
analysis   structural checks, Gauss-map matching and the curvature bound
cli        command-line front end
"""

__version__ = "0.1.0"
