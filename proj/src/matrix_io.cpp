#include "archemb/matrix_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "archemb/errors.hpp"

namespace archemb {

namespace {

constexpr char kMagic[4] = {'E', 'P', 'D', 'J'};

template <typename T>
void write_le(std::ostream& out, T value) {
    static_assert(std::is_integral_v<T>);
    unsigned char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i)
        bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    in.read(reinterpret_cast<char*>(bytes), sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        value |= static_cast<T>(bytes[i]) << (8 * i);
    return value;
}

}  // namespace

void append_matrix(std::ostream& out, const Eigen::MatrixXd& m, bool normalized) {
    out.write(kMagic, 4);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
    out.put(normalized ? 1 : 0);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            write_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(m(r, c)));
}

Eigen::MatrixXd read_matrix(std::istream& in, bool* normalized) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw NumericError("bad matrix file: missing EPDJ magic");
    const auto rows = read_le<std::uint32_t>(in);
    const auto cols = read_le<std::uint32_t>(in);
    const int flag = in.get();
    if (normalized) *normalized = flag == 1;
    Eigen::MatrixXd m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r)
        for (std::uint32_t c = 0; c < cols; ++c)
            m(r, c) = std::bit_cast<double>(read_le<std::uint64_t>(in));
    if (!in) throw NumericError("bad matrix file: truncated data");
    return m;
}

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m, bool normalized) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MissingArtifactError(path.string());
    append_matrix(out, m, normalized);
}

Eigen::MatrixXd load_matrix(const std::filesystem::path& path, bool* normalized) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError(path.string());
    return read_matrix(in, normalized);
}

void save_matrices(const std::filesystem::path& path, const std::vector<Eigen::MatrixXd>& ms) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MissingArtifactError(path.string());
    for (const auto& m : ms) append_matrix(out, m);
}

std::vector<Eigen::MatrixXd> load_matrices(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError(path.string());
    std::vector<Eigen::MatrixXd> ms;
    while (in.peek() != std::ifstream::traits_type::eof()) ms.push_back(read_matrix(in));
    return ms;
}

}  // namespace archemb
