"""Hard-coded restricted root data for the supported models.

Each entry lists the simple roots, (m_alpha, m_2alpha) multiplicities, rho in
the H_j coordinates and the Weyl group as integer matrices acting on lambda
coordinates. Element order matters: coset representatives are picked by first
occurrence in this list.
"""

ROOT_DATA: dict[str, dict] = {
    "h2": {
        "simple_roots": ["alpha"],
        "multiplicities": [[1, 0]],
        "rho": [0.5],
        "weyl_elements": [
            [[1]],
            [[-1]],
        ],
        "weyl_labels": ["e", "-1"],
    },
    "h3": {
        "simple_roots": ["alpha"],
        "multiplicities": [[2, 0]],
        "rho": [1.0],
        "weyl_elements": [
            [[1]],
            [[-1]],
        ],
        "weyl_labels": ["e", "-1"],
    },
    "h2xh2": {
        "simple_roots": ["alpha1", "alpha2"],
        "multiplicities": [[1, 0], [1, 0]],
        "rho": [0.5, 0.5],
        "weyl_elements": [
            [[1, 0], [0, 1]],
            [[-1, 0], [0, 1]],
            [[1, 0], [0, -1]],
            [[-1, 0], [0, -1]],
        ],
        "weyl_labels": ["e", "flip1", "flip2", "-1"],
    },
}


def get_root_data_table(model_id: str) -> dict:
    """Return the raw table for a model id.

    Raises:
        KeyError: If the model id is unknown
    """
    if model_id not in ROOT_DATA:
        raise KeyError(f"No root data for model '{model_id}'")
    return ROOT_DATA[model_id]
