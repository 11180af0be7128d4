"""
Paquete repository para NormOne Toolkit.

Este paquete contiene el núcleo numérico: operadores, POVMs discretos,
constructores covariantes, marginales y análisis de la propiedad de norma 1.
"""

__version__ = "1.0.0"
__author__ = "NormOne Team"
