#include "ganaudit/gten.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace ganaudit {

namespace {

void store_le16(std::uint16_t v, unsigned char* out) {
    out[0] = static_cast<unsigned char>(v & 0xff);
    out[1] = static_cast<unsigned char>(v >> 8);
}

void store_le64(std::uint64_t v, unsigned char* out) {
    for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::uint16_t load_le16(const unsigned char* in) {
    return static_cast<std::uint16_t>(in[0] | (in[1] << 8));
}

std::uint64_t load_le64(const unsigned char* in) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
    return v;
}

// doubles are serialized through their IEEE-754 bit pattern
std::uint64_t double_bits(double d) {
    std::uint64_t u;
    std::memcpy(&u, &d, sizeof(u));
    return u;
}

double bits_double(std::uint64_t u) {
    double d;
    std::memcpy(&d, &u, sizeof(d));
    return d;
}

std::uint32_t float_bits(float f) {
    std::uint32_t u;
    std::memcpy(&u, &f, sizeof(u));
    return u;
}

float bits_float(std::uint32_t u) {
    float f;
    std::memcpy(&f, &u, sizeof(f));
    return f;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error("gten: " + what + " (" + path + ")");
}

}  // namespace

void write_gten(const std::string& path, const Tensor& t, GtenDtype dtype) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");

    unsigned char head[8] = {'G', 'T', 'E', 'N', 0, 0, 0, 0};
    store_le16(1, head + 4);
    head[6] = static_cast<unsigned char>(dtype);
    head[7] = static_cast<unsigned char>(t.shape.size());
    out.write(reinterpret_cast<const char*>(head), sizeof(head));

    unsigned char dim[8];
    for (std::size_t d : t.shape) {
        store_le64(d, dim);
        out.write(reinterpret_cast<const char*>(dim), sizeof(dim));
    }

    if (dtype == GtenDtype::f64) {
        unsigned char buf[8];
        for (double v : t.data) {
            store_le64(double_bits(v), buf);
            out.write(reinterpret_cast<const char*>(buf), sizeof(buf));
        }
    } else {
        unsigned char buf[4];
        for (double v : t.data) {
            std::uint32_t u = float_bits(static_cast<float>(v));
            for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(u >> (8 * i));
            out.write(reinterpret_cast<const char*>(buf), sizeof(buf));
        }
    }
    if (!out) fail(path, "write failed");
}

Tensor read_gten(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");

    unsigned char head[8];
    in.read(reinterpret_cast<char*>(head), sizeof(head));
    if (!in) fail(path, "truncated header");
    if (std::memcmp(head, "GTEN", 4) != 0) fail(path, "bad magic");
    std::uint16_t version = load_le16(head + 4);
    if (version != 1) fail(path, "unsupported version " + std::to_string(version));
    unsigned char dtype = head[6];
    if (dtype > 1) fail(path, "unknown dtype " + std::to_string(dtype));
    unsigned char ndim = head[7];

    std::vector<std::size_t> shape(ndim);
    unsigned char dim[8];
    for (unsigned i = 0; i < ndim; ++i) {
        in.read(reinterpret_cast<char*>(dim), sizeof(dim));
        if (!in) fail(path, "truncated dims");
        shape[i] = static_cast<std::size_t>(load_le64(dim));
    }

    std::size_t n = Tensor::numel(shape);
    std::vector<double> data(n);
    if (dtype == 1) {
        unsigned char buf[8];
        for (std::size_t i = 0; i < n; ++i) {
            in.read(reinterpret_cast<char*>(buf), sizeof(buf));
            if (!in) fail(path, "truncated payload");
            data[i] = bits_double(load_le64(buf));
        }
    } else {
        unsigned char buf[4];
        for (std::size_t i = 0; i < n; ++i) {
            in.read(reinterpret_cast<char*>(buf), sizeof(buf));
            if (!in) fail(path, "truncated payload");
            std::uint32_t u = 0;
            for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(buf[b]) << (8 * b);
            data[i] = static_cast<double>(bits_float(u));
        }
    }
    // trailing bytes mean the header lied about the payload
    in.peek();
    if (!in.eof()) fail(path, "trailing bytes after payload");
    return Tensor(std::move(shape), std::move(data));
}

}  // namespace ganaudit
