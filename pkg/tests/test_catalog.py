import pytest

from cpoconv.catalog import NETWORKS, LayerSpec, layer_catalog
from cpoconv.errors import ConfigError

SIZES = {"resnet50": 13, "resnet101": 30, "resnet152": 47, "iv1": 19, "iv3": 49, "iv4": 81}


@pytest.mark.parametrize("net", NETWORKS)
def test_catalog_sizes_and_ids(net):
    layers = layer_catalog(net)
    assert len(layers) == SIZES[net]
    assert [l.layer_id for l in layers] == list(range(SIZES[net]))
    assert all(l.eligible and l.sh == l.sw == 1 for l in layers)
    for l in layers:
        cfg = l.config
        assert (cfg.oh, cfg.ow) == (l.oh, l.ow)


def test_resnet50_rows():
    layers = layer_catalog("resnet50")
    assert all((l.kh, l.kw) == (3, 3) and l.padding == "same" for l in layers)
    assert [(l.ih, l.ic, l.k) for l in layers[:2]] == [(75, 64, 64)] * 2
    assert (layers[12].ih, layers[12].ic, layers[12].k) == (10, 512, 512)


def test_inception_rows():
    assert layer_catalog("iv1")[0] == LayerSpec(0, 56, 56, 56, 56, 3, 3, 1, 1, 64, 192, "iv1")
    iv3 = layer_catalog("iv3")
    assert (iv3[13].kh, iv3[13].kw) == (1, 7)
    assert (iv3[14].kh, iv3[14].kw) == (7, 1)
    assert iv3[0].padding == "valid" and (iv3[0].oh, iv3[0].ih) == (147, 149)
    assert (iv3[41].ic, iv3[41].k) == (448, 384)
    iv4 = layer_catalog("iv4")
    assert (iv4[62].ic, iv4[62].k, iv4[62].kh, iv4[62].kw) == (256, 320, 7, 1)


def test_spec_flags_and_errors():
    pw = LayerSpec(0, 8, 8, 8, 8, 1, 1, 1, 1, 4, 4)
    assert pw.pointwise and not pw.eligible and pw.padding == "valid"
    strided = LayerSpec(1, 9, 9, 4, 4, 3, 3, 2, 2, 4, 4)
    assert not strided.eligible
    with pytest.raises(ConfigError):
        LayerSpec(2, 8, 8, 7, 7, 3, 3, 1, 1, 1, 1)  # neither VALID (6) nor SAME (8)
    with pytest.raises(ConfigError):
        LayerSpec(3, 8, 8, 6, 6, 3, 3, 1, 1, 0, 1)
    with pytest.raises(KeyError):
        layer_catalog("vgg16")
