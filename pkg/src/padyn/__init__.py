"""p-adic (2,1)-rational dynamical systems."""
