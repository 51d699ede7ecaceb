import dataclasses
import json

import numpy as np


def convert_json(obj):
    """ Convert obj to a version which can be serialized with JSON. """
    if is_json_serializable(obj):
        return obj
    else:
        if isinstance(obj, np.generic):
            return convert_json(obj.item())

        elif isinstance(obj, np.ndarray):
            return convert_json(obj.tolist())

        elif isinstance(obj, complex):
            return {"re": obj.real, "im": obj.imag}

        elif hasattr(obj, "to_dict"):
            return convert_json(obj.to_dict())

        elif dataclasses.is_dataclass(obj) and not isinstance(obj, type):
            return convert_json(dataclasses.asdict(obj))

        elif isinstance(obj, dict):
            return {_convert_key(k): convert_json(v)
                    for k, v in obj.items()}

        elif isinstance(obj, (tuple, list)):
            return [convert_json(x) for x in obj]

        elif hasattr(obj, '__name__') and not('lambda' in obj.__name__):
            return convert_json(obj.__name__)

        elif hasattr(obj, '__dict__') and obj.__dict__:
            obj_dict = {_convert_key(k): convert_json(v)
                        for k, v in obj.__dict__.items()}
            return {str(obj): obj_dict}

        return str(obj)


def _convert_key(k):
    if isinstance(k, tuple):
        return ",".join(str(x) for x in k)
    if isinstance(k, np.generic):
        k = k.item()
    return k if isinstance(k, (str, int, float, bool)) or k is None else str(k)


def is_json_serializable(v):
    try:
        json.dumps(v)
        return True
    except (TypeError, ValueError, OverflowError):
        return False
