#pragma once

#include <string>
#include <string_view>

#include "spectra/core.hpp"

namespace spectra {

// Shadow file format, version 1:
//   {"version":1,"n":..,"m":..,"blocks":[{"size":s,"lambda":[[r,c,v],..],
//    "a":[[[r,c,v],..],..],"b":[..]}]}
// Indices are 1-based with r <= c.  Doubles are written with round-trip precision.
std::string serialize(const Shadow& S);
Shadow deserialize(std::string_view text);

std::size_t set_bytes(const Shadow& S);

Shadow read_shadow_file(const std::string& path);
void write_shadow_file(const std::string& path, const Shadow& S);

} // namespace spectra
