#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "nanocoupler/fdtd/simulation.hpp"

namespace nc::fdtd {

static_assert(std::endian::native == std::endian::little, "BORF writer assumes a little-endian host");

enum class FieldId : std::int32_t { Er = 0, Ez = 1, Hphi = 2 };

struct BorfHeader {
    std::uint32_t version = 1;
    std::int32_t n_r = 0, n_z = 0;
    double pitch_nm = 0.0;
    FieldId field = FieldId::Hphi;
    std::int64_t step = 0;
};

/// Writes one field snapshot: magic "BORF", version, dimensions of the
/// stored array, pitch, field id, step index, then row-major float64 data.
inline void write_borf(const std::string& path, const Field2D& f, double pitch_nm, FieldId id, std::int64_t step)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + path);
    BorfHeader h;
    h.n_r = f.n_r;
    h.n_z = f.n_z;
    h.pitch_nm = pitch_nm;
    h.field = id;
    h.step = step;
    out.write("BORF", 4);
    out.write(reinterpret_cast<const char*>(&h.version), 4);
    out.write(reinterpret_cast<const char*>(&h.n_r), 4);
    out.write(reinterpret_cast<const char*>(&h.n_z), 4);
    out.write(reinterpret_cast<const char*>(&h.pitch_nm), 8);
    out.write(reinterpret_cast<const char*>(&h.field), 4);
    out.write(reinterpret_cast<const char*>(&h.step), 8);
    out.write(reinterpret_cast<const char*>(f.v.data()), static_cast<std::streamsize>(f.v.size() * sizeof(double)));
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

inline Field2D read_borf(const std::string& path, BorfHeader* header = nullptr)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "BORF", 4) != 0) throw Error(ErrorKind::Io, path + " is not a BORF file");
    BorfHeader h;
    in.read(reinterpret_cast<char*>(&h.version), 4);
    in.read(reinterpret_cast<char*>(&h.n_r), 4);
    in.read(reinterpret_cast<char*>(&h.n_z), 4);
    in.read(reinterpret_cast<char*>(&h.pitch_nm), 8);
    in.read(reinterpret_cast<char*>(&h.field), 4);
    in.read(reinterpret_cast<char*>(&h.step), 8);
    if (!in || h.n_r <= 0 || h.n_z <= 0) throw Error(ErrorKind::Io, "truncated BORF header in " + path);
    Field2D f(h.n_r, h.n_z);
    in.read(reinterpret_cast<char*>(f.v.data()), static_cast<std::streamsize>(f.v.size() * sizeof(double)));
    if (!in) throw Error(ErrorKind::Io, "truncated BORF data in " + path);
    if (header) *header = h;
    return f;
}

}  // namespace nc::fdtd
