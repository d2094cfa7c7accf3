class ApplicationError(Exception):
    pass
