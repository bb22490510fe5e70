"""Opcode numbers shared by the compiled and pure-Python kernels."""

CONST = 0
VAR = 1
ADD = 2
MUL = 3
NEG = 4
POWI = 5
POW = 6
EXP = 7
LN = 8
SIN = 9
COS = 10
ATAN = 11
ABS = 12

FUNCS = {"exp": EXP, "ln": LN, "sin": SIN, "cos": COS, "atan": ATAN, "abs": ABS}

# rk4 stop codes
STOP_NONE = 0
STOP_PIVOT = 1
STOP_SINGULAR = 2
