"""Tour of the weighted-dataset algebra in exact arithmetic.

Datasets are multisets over (prompt, response) pairs. Scaled unions and
conditional response distributions are the whole algebra; in rational
mode every identity below holds with zero tolerance.
"""

from fractions import Fraction

from boostsim.datasets import (
    INFINITE,
    RATIONAL,
    WeightedDataset,
    conditional,
    weight_of,
    weighted_union,
)

# two small datasets over prompts {0, 1} and responses {0, 1, 2}
left = WeightedDataset({(0, 1): 3, (0, 2): 1, (1, 0): 2}, RATIONAL)
right = WeightedDataset({(0, 1): 1, (1, 2): 5}, RATIONAL)

print("left  =", left)
print("right =", right)
print("|left| =", left.total(), " |right| =", right.total())

# weighted union is pointwise affine: (2*left + 1/2*right)(0,1) = 2*3 + 1/2*1
mix = weighted_union(2, left, Fraction(1, 2), right)
print("\nmix = 2*left (+) 1/2*right")
print("mix(0,1) =", weight_of(mix, 0, 1), "(= 2*3 + 1/2)")
print("|mix| =", mix.total(), "(= 2*|left| + 1/2*|right| =", 2 * left.total() + Fraction(1, 2) * right.total(), ")")

# conditionals normalize per prompt and sum to exactly one on support
print("\nmix(y=1 | x=0) =", conditional(mix, 0, 1))
print("mix(y=2 | x=0) =", conditional(mix, 0, 2))
total = sum(conditional(mix, 0, y) for y in (0, 1, 2))
print("sum over y of mix(y | x=0) =", total, "(exactly 1)")
print("mix(y=0 | x=7) =", conditional(mix, 7, 0), "(prompt absent: 0 by convention)")

# an infinite scale is legal only next to an empty dataset and adds nothing
empty = WeightedDataset({}, RATIONAL)
same = weighted_union(INFINITE, empty, 1, left)
print("\ninf * empty (+) left == left :", same == left)
