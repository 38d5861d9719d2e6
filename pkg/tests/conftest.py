"""Shared test doubles."""


class ScriptedModel:
    """Duck-typed model client answering each complete() from a fixed queue."""

    def __init__(self, answers):
        self.answers = list(answers)
        self.prompts = []

    def complete(self, role, prompt, temperature=0.0):
        self.prompts.append((role, prompt))
        return self.answers.pop(0)


class FnModel:
    """Duck-typed model client that routes each prompt through a function."""

    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def complete(self, role, prompt, temperature=0.0):
        self.calls += 1
        return self.fn(role, prompt)
