"""Regenerate the bundled integral fixtures with PySCF.

Each fixture gets three files:
  <name>.fcidump   one- and two-electron integrals over RHF canonical orbitals
  <name>.dipole    electronic position integrals <p|r|q> (origin at the nuclear charge centre)
  <name>.json      geometry, basis and reference energies computed here

Usage: python3 generate.py [outdir]
"""
import json
import sys

import numpy as np
from pyscf import ao2mo, fci, gto, mcscf, scf
from pyscf.tools import fcidump

FIXTURES = {
    "h2_sto3g": ("H 0 0 0; H 0 0 0.735", "sto-3g", []),
    "h2_631g": ("H 0 0 0; H 0 0 0.735", "6-31g", [(2, 2)]),
    "h4_631g": ("H 0 0 0; H 0 0 1.2; H 1.5 0 0; H 1.5 0 1.2", "6-31g", [(2, 2), (4, 4)]),
    "lih_sto3g": ("Li 0 0 0; H 0 0 1.6", "sto-3g", [(2, 2)]),
    "lih_631g_r16": ("Li 0 0 0; H 0 0 1.6", "6-31g", [(2, 2)]),
    "lih_631g_r24": ("Li 0 0 0; H 0 0 2.4", "6-31g", [(2, 2)]),
    "lih_631g_r32": ("Li 0 0 0; H 0 0 3.2", "6-31g", [(2, 2)]),
    "h2o_sto3g": ("O 0 0 0.1173; H 0 0.7572 -0.4692; H 0 -0.7572 -0.4692", "sto-3g", [(4, 4)]),
    "h2o_631g": ("O 0 0 0.1173; H 0 0.7572 -0.4692; H 0 -0.7572 -0.4692", "6-31g", [(4, 4)]),
    "beh2_631g_stretched": ("Be 0 0 0; H 0 0 2.2; H 0 0 -2.2", "6-31g", [(4, 6)]),
    "n2_631g": ("N 0 0 0; N 0 0 1.098", "6-31g", [(6, 6)]),
}


def write_dipole(path, d):
    n = d.shape[1]
    with open(path, "w") as f:
        f.write(f"NORB={n}\n")
        for label, m in zip("xyz", d):
            f.write(f"OPERATOR {label}\n")
            for i in range(n):
                for j in range(i + 1):
                    if abs(m[i, j]) > 1e-14:
                        f.write(f"{m[i, j]:.17e} {i + 1} {j + 1}\n")


def lowest_casscf(mf, no, ne, starts=4, kick=0.05):
    """Lowest CASSCF energy over the canonical start and a few randomly rotated ones.

    Symmetric canonical orbitals can converge to a saddle point, so the canonical start
    alone is not a reliable reference.
    """
    from scipy.linalg import expm

    rng = np.random.default_rng(0)
    n = mf.mo_coeff.shape[1]
    best = None
    for k in range(starts + 1):
        c = mf.mo_coeff
        if k:
            a = rng.uniform(-kick, kick, (n, n))
            c = c @ expm(a - a.T)
        mc = mcscf.CASSCF(mf, no, ne)
        mc.conv_tol = 1e-11
        mc.max_cycle_macro = 200
        e = mc.kernel(c)[0]
        if mc.converged and (best is None or e < best):
            best = e
    return best


def main(outdir):
    for name, (atom, basis, spaces) in FIXTURES.items():
        mol = gto.M(atom=atom, basis=basis, unit="Angstrom", verbose=0, symmetry=False)
        mf = scf.RHF(mol)
        mf.conv_tol = 1e-12
        mf.conv_tol_grad = 1e-9
        mf.kernel()
        c = mf.mo_coeff
        norb = c.shape[1]
        h1 = c.T @ mf.get_hcore() @ c
        eri = ao2mo.restore(8, ao2mo.full(mol, c), norb)
        fcidump.from_integrals(
            f"{outdir}/{name}.fcidump", h1, eri, norb, mol.nelectron,
            nuc=mol.energy_nuc(), ms=0, tol=1e-14, float_format=" %.17e",
        )
        charges = mol.atom_charges()
        centre = charges @ mol.atom_coords() / charges.sum()
        with mol.with_common_orig(centre):
            r = mol.intor_symmetric("int1e_r", comp=3)
        d = np.einsum("xij,ip,jq->xpq", r, c, c)
        write_dipole(f"{outdir}/{name}.dipole", d)

        info = {
            "name": name,
            "atom_angstrom": atom,
            "basis": basis,
            "charge": 0,
            "n_orb": norb,
            "n_elec": mol.nelectron,
            "e_nuc": mol.energy_nuc(),
            "e_rhf": mf.e_tot,
            "casci": {},
            "casscf": {},
        }
        if norb <= 8:
            e_fci, _ = fci.FCI(mf).kernel()
            info["e_fci"] = e_fci
        for ne, no in spaces:
            key = f"{ne},{no}"
            info["casci"][key] = mcscf.CASCI(mf, no, ne).kernel()[0]
            info["casscf"][key] = lowest_casscf(mf, no, ne)
        with open(f"{outdir}/{name}.json", "w") as f:
            json.dump(info, f, indent=2)
        print(name, norb, mol.nelectron, mf.e_tot)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else ".")
