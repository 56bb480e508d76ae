def test_imports():

    modules = [
        'qlattice', 'numpy', 'numba', 'scipy', 'pandas', 'matplotlib',
        'qlattice.qnum', 'qlattice.dist', 'qlattice.lattice', 'qlattice.limit',
        'qlattice.approx', 'qlattice.converge', 'qlattice.mp_converge',
        'qlattice.mc', 'qlattice.config', 'qlattice.cli',
        'qlattice.visualization',
    ]

    for m in modules:

        dep_worked = True

        try:
            exec(f"import {m}")
            print(f"'import {m}' passed.")
            dep_worked = True
        except Exception as e:
            print(e)
            dep_worked = False

        assert dep_worked

if __name__ == "__main__":
    test_imports()
