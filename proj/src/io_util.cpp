#include "spectromind/io_util.hpp"

#include <iomanip>
#include <sstream>

namespace spectromind::io {

std::string hash_hex(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex << std::setfill('0') << std::setw(16) << h;
    return os.str();
}

void write_f32_block(std::ofstream& f, const float* p, std::size_t n) {
    f.write(reinterpret_cast<const char*>(p), std::streamsize(n * sizeof(float)));
}

void read_f32_block(std::istream& f, float* p, std::size_t n, const std::string& what) {
    f.read(reinterpret_cast<char*>(p), std::streamsize(n * sizeof(float)));
    if (!f) throw DataError("truncated float payload in " + what);
}

std::string read_text_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw DataError("cannot open " + p.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void write_text_file(const std::filesystem::path& p, const std::string& content) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + p.string());
    f << content;
}

}  // namespace spectromind::io
