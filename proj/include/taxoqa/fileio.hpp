#pragma once

#include <string>
#include <string_view>

namespace taxoqa {

// Whole-file read; throws DataError when the file cannot be opened.
std::string read_file(const std::string& path);

// Writes through `<path>.tmp` and a rename, so readers never see a partial file.
void write_file_atomic(const std::string& path, std::string_view bytes);

}  // namespace taxoqa
