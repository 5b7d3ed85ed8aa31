#pragma once

#include <string>

namespace bsi {

/// Round-trip-exact decimal formatting used in every CSV we emit, so that
/// identical runs produce byte-identical files.
std::string fmt_double(double v);

/// Writes via a temporary file in the same directory and renames into
/// place, so readers never observe a partial file.
void atomic_write_text(const std::string& path, const std::string& content);

std::string read_text(const std::string& path);

}  // namespace bsi
