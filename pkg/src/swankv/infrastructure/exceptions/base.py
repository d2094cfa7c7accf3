class InfrastructureError(Exception):
    pass
