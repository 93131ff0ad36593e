"""Three-valued verdicts for policy-guarded checks.

REJECT is not a negative answer: it records that the properness policy
declined to certify either way.  Callers must propagate it, never collapse
it into False.
"""

from enum import Enum


class Verdict(Enum):
    YES = "yes"
    NO = "no"
    REJECT = "policy-reject"

    def __bool__(self):
        if self is Verdict.REJECT:
            raise ValueError("policy-reject verdict has no boolean value")
        return self is Verdict.YES

    @staticmethod
    def of(flag: bool) -> "Verdict":
        return Verdict.YES if flag else Verdict.NO
