from typing import List, NamedTuple, Set, Union

from colorama import Fore, Style


class StructureViolation(NamedTuple):
    code: str
    message: str
    deviation: float = 0.0
    tolerance: float = 0.0
    subject: str = "input"

    def to_string(self):
        res = Style.BRIGHT + Fore.RESET + self.subject + Style.RESET_ALL
        res += Fore.CYAN + ":" + Style.RESET_ALL
        res += " "
        res += Style.BRIGHT + Fore.RED + self.code + Style.RESET_ALL
        res += " "
        res += self.message
        if self.tolerance:
            res += "\n"
            res += Style.DIM
            res += f"deviation {self.deviation:.3e} > tolerance {self.tolerance:.3e}"
            res += Style.RESET_ALL
        return res

    def __str__(self):
        return self.to_string()


class BaseChecker:
    def __init__(self, enable: Union[Set[str], None] = None):
        self.enable = enable or set()

        self.checks_errors: List[StructureViolation] = []

    def is_message_enabled(self, message: str):
        if self.enable:
            return message in self.enable
        return True

    def register_violation(
        self, code: str, message: str, deviation: float = 0.0, tolerance: float = 0.0, subject: str = "input"
    ):
        self.checks_errors.append(
            StructureViolation(code=code, message=message, deviation=deviation, tolerance=tolerance, subject=subject)
        )
