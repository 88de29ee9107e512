class StopGoError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(StopGoError):
    """A structural problem: unknown ids, missing clocks or budgets, bad units."""


class ScenarioError(StopGoError):
    """Scenario file could not be parsed or failed validation.

    ``problems`` is a list of "field.path: message" strings, one per violation.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
