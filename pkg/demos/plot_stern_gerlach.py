"""
Stern-Gerlach analogue
======================

A spin-x beam is split along z, recombined coherently, checked by a blocked
x device, and finally split along z again.  The blocked device absorbs
nothing: it only confirms the state that the merge rebuilt.

"""

from afshar_sim.spin import X, Z, Beam, Detect, Device, Merge, eigenstate, element_names, run_pipeline

source = Beam(1.0 + 0j, eigenstate(X, "up"))


def chain(block_z_down=False):
    return [
        Device(X, block_down=True),
        Device(Z, block_down=block_z_down),
        Merge(),
        Device(X, block_down=True),
        Device(Z),
        Detect(),
    ]


for block in (False, True):
    els = chain(block)
    rep = run_pipeline(els, source)
    print("z-down blocked" if block else "full pipeline")
    for name, lost in zip(element_names(els), rep.absorbed):
        if lost > 1e-15:
            print(f"  absorbed at {name}: {lost:.3f}")
    for path, flux in rep.detector_flux.items():
        print(f"  {path}: {flux:.3f}")
