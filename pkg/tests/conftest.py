"""Shared end-to-end fixtures: one synthetic stack built into one container."""

import pytest

from fsr import cli


@pytest.fixture(scope="session")
def e2e_root(tmp_path_factory):
    return tmp_path_factory.mktemp("e2e")


@pytest.fixture(scope="session")
def stack_dir(e2e_root):
    d = e2e_root / "stack"
    rc = cli.main(
        [
            "synth", str(d),
            "--scene", "three-plane",
            "--size", "128",
            "--k", "6",
            "--seed", "7",
            "--ground-truth",
        ]
    )
    assert rc == 0
    return d


@pytest.fixture(scope="session")
def container_dir(e2e_root, stack_dir):
    d = e2e_root / "cont"
    rc = cli.main(["build", str(stack_dir), str(d), "--threads", "2"])
    assert rc == 0
    return d
