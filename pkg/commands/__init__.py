# Archivo __init__.py para el paquete commands
