import hashlib
import logging
from dataclasses import dataclass, field

from .constants import PhysicalConstants
from .components import HBTParams, TIADesign, InputNode, OpticalFrontEnd
from ..errors import HDInvalidModelError

__all__ = ('DetectorModel', 'validate')

l = logging.getLogger('hdkit.model.detector')


@dataclass(frozen=True)
class DetectorModel:
    """
    The root configuration object: optical front end, photodiodes, amplifier, parasitics and the spectrum analyzer
    noise floor. A DetectorModel is validated on construction and immutable afterwards.

    :ivar esa_danl_dbm_hz:  Displayed average noise level of the spectrum analyzer (dBm/Hz)
    :ivar name:             Free-form name, usually the preset it came from
    :ivar metadata:         ``(key, value)`` string pairs carried verbatim (e.g. photodiode bias voltages)
    """
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    hbt: HBTParams = field(default_factory=HBTParams)
    tia: TIADesign = field(default_factory=TIADesign)
    input: InputNode = field(default_factory=InputNode)
    frontend: OpticalFrontEnd = field(default_factory=OpticalFrontEnd)
    esa_danl_dbm_hz: float = -168.0
    name: str = 'custom'
    metadata: tuple = ()

    def __post_init__(self):
        validate(self)

    def problems(self):
        out = []
        out.extend(self.constants.problems())
        out.extend(self.hbt.problems())
        out.extend(self.tia.problems(hbt=self.hbt))
        out.extend(self.input.problems())
        out.extend(self.frontend.problems())
        if not -400.0 <= self.esa_danl_dbm_hz < 0.0:
            out.append(('esa_danl_dbm_hz', "analyzer noise floor must lie in [-400, 0) dBm/Hz"))
        for item in self.metadata:
            if len(item) != 2 or not all(isinstance(x, str) for x in item):
                out.append(('metadata', "entries must be (key, value) string pairs"))
                break
        return out

    def replace(self, **kwargs):
        """
        Return a copy with some top-level fields replaced. The copy is validated.
        """
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(kwargs)
        return DetectorModel(**values)

    def fingerprint(self):
        """
        A stable hash of the model's configuration text.
        """
        from .config import dump_model
        return hashlib.sha256(dump_model(self).encode('utf-8')).hexdigest()


def validate(model):
    """
    Check every invariant of ``model`` and its components.

    :param DetectorModel model: The model to check.
    :return:                    The model itself when it is valid.
    :raises HDInvalidModelError: listing every violated invariant.
    """
    problems = model.problems()
    if problems:
        l.debug("model %s has %d problems", model.name, len(problems))
        raise HDInvalidModelError(problems)
    return model
