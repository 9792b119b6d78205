"""
예외 계층 정의

커널은 예외를 던지고, CLI/시나리오 계층이 결과 딕셔너리와 종료 코드로 변환한다.
"""


class LabError(Exception):
    """모든 실험실 오류의 기본 클래스"""
    exit_code = 1


# --- 기하 ---
class GeometryError(LabError):
    pass


class EmptyMaskError(GeometryError):
    pass


class MaskError(GeometryError):
    pass


class DomainParameterError(GeometryError):
    pass


class ShapeOutsideGridError(GeometryError):
    pass


class IncompatibleHalfSpaceError(GeometryError):
    pass


class PolarizationOutOfGridError(GeometryError):
    pass


# --- 필드 ---
class FieldError(LabError):
    pass


class InvalidValueError(FieldError):
    pass


class MaskMismatchError(FieldError):
    pass


class NegativeValueError(FieldError):
    pass


class SignedFieldError(FieldError):
    pass


class NonInvariantMaskError(FieldError):
    pass


class NonSteinerMaskError(FieldError):
    pass


class NonRadialMaskError(FieldError):
    pass


# --- 고유값 솔버 ---
class SolverError(LabError):
    exit_code = 3


class NonCoerciveError(SolverError):
    pass


class NoPositiveDirectionError(SolverError):
    pass


class NonConvergenceError(SolverError):
    pass


class NonPrincipalError(SolverError):
    pass


class NonPositiveDenominatorError(SolverError):
    pass


# --- 설정 / 파일 ---
class ConfigError(LabError):
    exit_code = 2


class FileFormatError(LabError):
    exit_code = 2


class SignedFieldWarning(UserWarning):
    """부호가 섞인 필드를 편광할 때 (등측도성이 보장되지 않음)"""


def exit_code_for(error: Exception) -> int:
    """예외를 CLI 종료 코드로 변환"""
    if isinstance(error, LabError):
        return error.exit_code
    return 1
