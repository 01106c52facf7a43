"""Exceptions shared across the analysis pipeline."""


class StructuralError(RuntimeError):
    """The input graph does not have the structure of a Preparata distance graph."""


class BudgetExceeded(RuntimeError):
    pass
