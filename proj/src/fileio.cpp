#include "taxoqa/fileio.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "taxoqa/error.hpp"

namespace taxoqa {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write '" + tmp + "'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw DataError("short write to '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace taxoqa
