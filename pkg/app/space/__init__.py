from app.space.params import (
    Configuration,
    ParameterSpace,
    ParameterSpec,
    ParamKind,
    Role,
    check_config,
    decode,
    encode,
    encode_many,
    fingerprint,
    input_grid,
    subspace,
    validate_space,
)
from app.space.reformulation import (
    BoundReformulation,
    apply_reformulation,
    check_reformulations,
    resolve,
)

__all__ = [
    "BoundReformulation",
    "Configuration",
    "ParamKind",
    "ParameterSpace",
    "ParameterSpec",
    "Role",
    "apply_reformulation",
    "check_config",
    "check_reformulations",
    "decode",
    "encode",
    "encode_many",
    "fingerprint",
    "input_grid",
    "resolve",
    "subspace",
    "validate_space",
]
