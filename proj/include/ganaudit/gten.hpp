#pragma once

#include <string>

#include "ganaudit/tensor.hpp"

namespace ganaudit {

// GTEN tensor file:
//   magic   "GTEN"         4 bytes
//   version u16 = 1        little-endian
//   dtype   u8             0 = f32, 1 = f64
//   ndim    u8
//   dims    ndim x u64     little-endian
//   payload row-major, little-endian, product(dims) x dtype size
enum class GtenDtype : unsigned char { f32 = 0, f64 = 1 };

void write_gten(const std::string& path, const Tensor& t,
                GtenDtype dtype = GtenDtype::f64);

Tensor read_gten(const std::string& path);

}  // namespace ganaudit
