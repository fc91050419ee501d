"""Polynomial identities of the alternating ternary commutator.

The trilinear operation [a,b,c] = abc - acb - bac + bca + cab - cba in a free
associative algebra satisfies identities beyond its alternating property.
This package searches for them degree by degree: it enumerates association
types of the free alternating ternary algebra, projects identity candidates
into the irreducible representations of the symmetric group (via Clifton
matrices), and separates new identities from consequences of lower-degree
ones with exact modular linear algebra.

Modules:
    ternary     association types, canonical monomials, expansion maps
    permgroup   partitions, standard tableaux, Clifton / natural representation
    modlinalg   row canonical forms, nullspaces, streaming reduction mod p
    liftgen     the degree-7 identity and its liftings to degrees 9 and 11
    mlpipeline  per-partition multilinear rank computations
    mdpipeline  the non-multilinear kernel computation at a fixed multidegree
    cli         batch front end
"""

__version__ = "0.1.0"
