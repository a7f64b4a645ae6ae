"""Good families of subsets and the vertex-connectivity survivable network design reduction."""
import importlib.metadata

try:
    __version__ = importlib.metadata.version("vcsndp")
except importlib.metadata.PackageNotFoundError:
    # Running from a source checkout without an install
    __version__ = "0+unknown"
