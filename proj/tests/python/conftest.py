import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parents[2]

# Allow running against a CMake-built extension without installing the wheel.
sys.path.insert(0, str(ROOT / "python"))
build = ROOT / "build"
if any(build.glob("_guitest*")):
    sys.path.insert(0, str(build))
