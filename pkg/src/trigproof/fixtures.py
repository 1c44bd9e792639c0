"""Small identities with known shortest proof lengths."""
from __future__ import annotations

from .syntax import parse

# name -> (identity, shortest proof length)
GOLDEN = {
    "one_step": ("sin(3*x + pi/2)*cos(x) - sin(4*x + pi/2)/2 - sin(2*x + pi/2)/2", 1),
    "generated": ("sqrt(3)*sin(x)/2 + sqrt(3)*sin(5*x)/2 + cos(x)/2 - cos(5*x)/2"
                  " - 2*sin(3*x)*sin(2*x + pi/3)", 3),
    "five_step": ("-sin(2*x)*cos(x + pi/6) - sin(x + pi/6)**2*cos(x + pi/3)"
                  " - sin(x + pi/6)*sin(x + pi/3)*cos(x + pi/6) + sin(3*x + pi/6)", 5),
    "four_step": ("-sin(x)*sin(2*x)*sin(3*x) - sin(x)*cos(2*x)*cos(3*x)"
                  " - sin(2*x)*cos(x)*cos(3*x) + sin(3*x)*cos(x)*cos(2*x)", 4),
}


def golden(name: str):
    if name in THEORY_INSTANCES and name not in GOLDEN:
        return theory_instance(name)
    text, _ = GOLDEN[name]
    return parse(text)


# Shallow instances for checking the expected-length recursion against
# simulation: two of the above plus the first five corpus (seed 1) identities
# whose shortest proof has length 2 or 3.
THEORY_INSTANCES = {
    "one_step": GOLDEN["one_step"][0],
    "generated": GOLDEN["generated"][0],
    "s1-000001": "sin(4*x)*sin(5*x + pi/4)*cos(5*x - pi/2) - sqrt(2)*sin(4*x)/4"
                 " - cos(6*x - pi/4)/4 + cos(14*x - pi/4)/4",
    "s1-000005": "-sin(x - pi/2)*cos(2*x + pi/6)*cos(4*x + pi/2) - sin(x + 2*pi/3)*cos(4*x + pi/2)/2"
                 " - sin(x + 5*pi/6)/4 + sin(7*x + pi/6)/4",
    "s1-000009": "3*sin(2*x - pi/3)*cos(2*x - pi/2) - 3*sin(2*x + pi/2)*cos(2*x + 2*pi/3)/2"
                 " - 3*sin(2*x + 2*pi/3)*cos(2*x + pi/2)/2 - 3/4",
    "s1-000013": "3*sin(2*x)*cos(5*x - pi/2) - 3*sin(5*x - pi/2)*cos(2*x)"
                 " - cos(x - pi/2)*cos(5*x + pi/4)/2 + 3*sin(3*x - pi/2) + cos(4*x + 3*pi/4)/4"
                 " + cos(6*x - pi/4)/4",
    "s1-000023": "sin(x + pi/3)*sin(4*x) - 2*sqrt(2)*sin(3*x - pi/2)*cos(x + pi/6)"
                 " + sqrt(2)*sin(2*x - 2*pi/3) + sqrt(2)*sin(4*x - pi/3) - cos(3*x - pi/3)/2"
                 " + cos(5*x + pi/3)/2",
}


def theory_instance(name: str):
    return parse(THEORY_INSTANCES[name])
