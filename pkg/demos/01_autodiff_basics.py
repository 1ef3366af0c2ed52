"""Tour of the reverse-mode engine: tensors, tapes, and gradient checks."""

from mmrobust.autodiff import (
    Tape,
    Tensor,
    activation,
    backward,
    gradient_check,
    matmul,
    mean_all,
    mul,
)

print("=== 1. a scalar chain rule, by hand and by tape ===")
x = Tensor(1, 1, [2.0])
tape = Tape()
loss = mul(mul(x, x, tape), x, tape)  # x^3
backward(loss, tape)
print(f"f(x) = x^3 at x = 2.0        -> {loss.item()}")
print(f"tape gradient df/dx          -> {x.grad[0, 0]}")
print(f"hand gradient 3 * x^2        -> {3 * 2.0 ** 2}")

print()
print("=== 2. gradients accumulate across backward calls ===")
# A second pass over a fresh tape adds into .grad; callers reset between
# steps with zero_grad, exactly like an optimizer loop would.
tape = Tape()
backward(mul(mul(x, x, tape), x, tape), tape)
print(f"after a second backward      -> {x.grad[0, 0]} (twice the gradient)")
x.zero_grad()
print(f"after zero_grad              -> {x.grad[0, 0]}")

print()
print("=== 3. a small tanh network, checked against finite differences ===")
inputs = Tensor(4, 3, [0.1, -0.4, 0.8, 0.3, -0.7, 0.2, 0.5, 0.9, -0.1, -0.6, 0.4, 0.0])
w1 = Tensor(3, 5, [((7 * i) % 11 - 5) / 10.0 for i in range(15)])
w2 = Tensor(5, 1, [0.4, -0.3, 0.2, 0.1, -0.5])


def two_layer_loss():
    tape = Tape()
    hidden = activation(matmul(inputs, w1, tape), "tanh", tape)
    out = matmul(hidden, w2, tape)
    return mean_all(mul(out, out, tape), tape), tape


worst = gradient_check(two_layer_loss, [w1, w2])
print(f"worst relative error over every weight entry: {worst:.3e}")
print("anything below 1e-4 means the tape and the numerics agree")
