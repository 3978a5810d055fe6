"""Conventional evaluation-protocol parameters.

These class lists and subject/camera splits follow the original dataset
publications' conventions.  They ship as editable defaults (and as manifest
templates under templates/), not as fixed truths: override them in the
manifest when your distribution differs.
"""

CONVENTION_NOTE = (
    "conventional split from the source dataset publications; "
    "edit to match your distribution"
)

# The three 8-class action subsets of the 20-class, 10-subject corpus.
MSR_CLASS_SETS = {
    "msr_as1": [2, 3, 5, 6, 10, 13, 18, 20],
    "msr_as2": [1, 4, 7, 8, 9, 11, 12, 14],
    "msr_as3": [6, 14, 15, 16, 17, 18, 19, 20],
}

# Odd/even subject halves: the common half-and-half convention.
MSR_TRAIN_SUBJECTS = [1, 3, 5, 7, 9]
MSR_TEST_SUBJECTS = [2, 4, 6, 8, 10]

# The 20 training performers of the cross-subject protocol.
NTU_TRAIN_SUBJECTS = [
    1, 2, 4, 5, 8, 9, 13, 14, 15, 16,
    17, 18, 19, 25, 27, 28, 31, 34, 35, 38,
]

# Cross-view: cameras 2 and 3 train, camera 1 tests.
NTU_TRAIN_CAMERAS = [2, 3]
NTU_TEST_CAMERAS = [1]


def default_params(protocol: str) -> dict:
    """Editable protocol parameters for a known protocol name."""
    if protocol in MSR_CLASS_SETS:
        return {
            "classes": list(MSR_CLASS_SETS[protocol]),
            "train_subjects": list(MSR_TRAIN_SUBJECTS),
            "test_subjects": list(MSR_TEST_SUBJECTS),
            "note": CONVENTION_NOTE,
        }
    if protocol == "ntu_cross_subject":
        return {"train_subjects": list(NTU_TRAIN_SUBJECTS), "note": CONVENTION_NOTE}
    if protocol == "ntu_cross_view":
        return {
            "train_cameras": list(NTU_TRAIN_CAMERAS),
            "test_cameras": list(NTU_TEST_CAMERAS),
            "note": CONVENTION_NOTE,
        }
    if protocol == "custom":
        return {"train_ids": [], "test_ids": []}
    raise ValueError(f"unknown protocol {protocol!r}")
