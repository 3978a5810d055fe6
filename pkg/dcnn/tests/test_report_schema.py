"""The evaluation report must follow the schema shared with the encoder
package's linear baseline, so downstream tooling can read either."""

import jsonschema
import numpy as np

from spmf_dcnn import EvalReport

REPORT_SCHEMA = {
    "type": "object",
    "required": [
        "class_labels",
        "confusion_matrix",
        "per_class_accuracy",
        "average_accuracy",
        "absent_classes",
    ],
    "additionalProperties": False,
    "properties": {
        "class_labels": {"type": "array", "items": {"type": "integer"}},
        "confusion_matrix": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        },
        "per_class_accuracy": {
            "type": "array",
            "items": {
                "anyOf": [
                    {"type": "number", "minimum": 0, "maximum": 1},
                    {"type": "null"},
                ]
            },
        },
        "average_accuracy": {"type": "number", "minimum": 0, "maximum": 1},
        "absent_classes": {"type": "array", "items": {"type": "integer"}},
    },
}


def test_report_schema():
    report = EvalReport(
        class_labels=(1, 2, 9),
        confusion=np.array([[3, 1, 0], [0, 4, 0], [0, 0, 0]]),
        per_class_accuracy=(0.75, 1.0, None),
        average_accuracy=0.875,
        absent_classes=(9,),
    )
    jsonschema.validate(report.to_dict(), REPORT_SCHEMA)


def test_report_json_is_plain_types():
    report = EvalReport(
        class_labels=(0, 1),
        confusion=np.array([[2, 0], [0, 2]]),
        per_class_accuracy=(1.0, 1.0),
        average_accuracy=1.0,
        absent_classes=(),
    )
    doc = report.to_dict()
    import json

    json.dumps(doc)  # must not need numpy-aware encoding
