"""Template libraries and compilation of specifications against them."""

from functools import lru_cache
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

from src.config import settings
from src.exceptions import ConfigurationError
from src.expander import expand
from src.logger import app_logger
from src.parser import SurfaceSpec, Template, parse_file, parse_spec
from src.syntax import Specification, type_check

BUNDLES = ("ltl_past", "mtl", "mtltl", "utils", "experiments")
DEFAULT_BUNDLES = ("ltl_past", "mtl", "mtltl", "utils")


class LibraryCatalog:
    """Named template bundles read from ``lib_dir``."""

    def __init__(self, lib_dir: Optional[Union[str, Path]] = None):
        self.lib_dir = Path(lib_dir or settings.lib_dir)
        self._bundles: Dict[str, SurfaceSpec] = {}

    def path(self, name: str) -> Path:
        return self.lib_dir / f"{name}.lola"

    def bundle(self, name: str) -> SurfaceSpec:
        if name not in self._bundles:
            path = self.path(name)
            if not path.is_file():
                raise ConfigurationError(f"unknown library bundle {name}", {"path": str(path)})
            self._bundles[name] = parse_file(path)
            app_logger.debug(f"loaded bundle {name} from {path}")
        return self._bundles[name]

    def templates(self, name: str) -> Dict[str, Template]:
        return dict(self.bundle(name).templates)

    def resolve(self, ref: Union[str, Path]) -> SurfaceSpec:
        """A bundle name, or the path of a library file."""
        if str(ref) in BUNDLES or self.path(str(ref)).is_file():
            return self.bundle(str(ref))
        path = Path(ref)
        if not path.is_file():
            raise ConfigurationError(f"library {ref} is neither a bundle nor a file")
        return parse_file(path)

    def load(self, refs: Iterable[Union[str, Path]]) -> SurfaceSpec:
        merged = SurfaceSpec()
        for ref in refs:
            merged = merged.merge(self.resolve(ref))
        return merged


@lru_cache(maxsize=None)
def default_catalog() -> LibraryCatalog:
    return LibraryCatalog()


def ltl_past_templates(catalog: Optional[LibraryCatalog] = None) -> Dict[str, Template]:
    """once, historically, since and yesterday."""
    return (catalog or default_catalog()).templates("ltl_past")


def mtl_templates(catalog: Optional[LibraryCatalog] = None) -> Dict[str, Template]:
    """until, eventually and always over a bounded interval."""
    return (catalog or default_catalog()).templates("mtl")


def mtltl_templates(catalog: Optional[LibraryCatalog] = None) -> Dict[str, Template]:
    return (catalog or default_catalog()).templates("mtltl")


def utils_templates(catalog: Optional[LibraryCatalog] = None) -> Dict[str, Template]:
    return (catalog or default_catalog()).templates("utils")


def experiment_templates(catalog: Optional[LibraryCatalog] = None) -> Dict[str, Template]:
    return (catalog or default_catalog()).templates("experiments")


def compile_surface(
    surface: SurfaceSpec,
    libs: Iterable[Union[str, Path]] = (),
    include_stdlib: Optional[bool] = None,
    max_depth: Optional[int] = None,
    catalog: Optional[LibraryCatalog] = None,
) -> Specification:
    """Merge libraries before ``surface``, expand and type check."""
    catalog = catalog or default_catalog()
    include_stdlib = settings.include_stdlib if include_stdlib is None else include_stdlib
    refs: List[Union[str, Path]] = list(DEFAULT_BUNDLES) if include_stdlib else []
    refs.extend(libs)
    merged = catalog.load(refs).merge(surface)
    return type_check(expand(merged, max_depth))


def compile_source(source: str, source_name: str = "<spec>", **options) -> Specification:
    return compile_surface(parse_spec(source, source_name), **options)


def compile_file(path: Union[str, Path], **options) -> Specification:
    return compile_surface(parse_file(path), **options)


_EXPERIMENTS = {
    "nsum": "input int s\noutput int n_sum = nsum(s, {n})\n",
    "boolean_period_width": "input bool p\noutput bool periodic_width = period_width({n}, p)\n",
    "boolean_period_height": "input bool p\noutput bool periodic_height = period_height({n}, p)\n",
    "smooth_period_width": "input bool p\noutput int smooth_period_width = smooth_width({n}, p)\n",
    "smooth_period_height": "input bool p\noutput int smooth_period_height = smooth_height({n}, p)\n",
    "alarm": (
        "input bool alarm\ninput bool allclear\ninput bool shutdown\n"
        "output bool prop = alarm_prop(alarm, allclear, shutdown)\n"
    ),
    "sender": "input SndrState senderState\noutput bool prop = sender_prop(senderState)\n",
}
EXPERIMENT_FAMILIES = tuple(_EXPERIMENTS)


def experiment_source(name: str, n: int = 1) -> str:
    if name not in _EXPERIMENTS:
        raise ConfigurationError(
            f"unknown experiment {name}; choose one of {', '.join(EXPERIMENT_FAMILIES)}")
    return _EXPERIMENTS[name].format(n=n)


def experiment_spec(name: str, n: int = 1, catalog: Optional[LibraryCatalog] = None) -> Specification:
    """Typed specification of one experiment family at parameter ``n``."""
    return compile_source(
        experiment_source(name, n), f"<experiment {name}>",
        libs=("experiments",), include_stdlib=True, catalog=catalog,
    )
