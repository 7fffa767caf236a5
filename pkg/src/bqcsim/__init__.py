"""Desk-scale workbench for fault-tolerant blind quantum computation.

Subpackages: simcore (dense statevector core), steane ([[7,1,3]] gadgets),
brickwork (MBQC substrate), compiler (circuit -> brickwork), protocol
(client/server runs), ledger (exact resource accounting), cli.
"""

__version__ = "0.1.0"
