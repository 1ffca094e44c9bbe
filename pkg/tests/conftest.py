import warnings

import numpy as np
import pytest

from ppgap import Dataset, ordinal_specs
from ppgap.indicators import BinaryIndicatorWarning
from ppgap.reference import DegenerateColumnWarning

# Running example E: four people, an ordinal indicator with cutoff 2 and a
# binary indicator with cutoff 1, equal weights.
E_VALUES = [[0, 0], [1, 0], [2, 0], [3, 1]]


@pytest.fixture(autouse=True)
def _quiet_expected_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BinaryIndicatorWarning)
        warnings.simplefilter("ignore", DegenerateColumnWarning)
        yield


@pytest.fixture
def example_e():
    specs = ordinal_specs([4, 2], [2, 1])
    data = Dataset(np.array(E_VALUES, float), tuple(s.name for s in specs))
    return data, specs


E_SPEC_YAML = """\
subgroup_column: region
indicators:
  - name: x1
    kind: ordinal
    categories: ["0", "1", "2", "3"]
    cutoff_z: 2
    weight_w: 1
  - name: x2
    kind: ordinal
    categories: ["0", "1"]
    cutoff_z: 1
    weight_w: 1
"""

E_CSV = "x1,x2,region\n0,0,a\n1,0,a\n2,0,b\n3,1,b\n"


@pytest.fixture
def e_files(tmp_path):
    spec = tmp_path / "spec.yaml"
    spec.write_text(E_SPEC_YAML)
    data = tmp_path / "e.csv"
    data.write_text(E_CSV)
    return spec, data
