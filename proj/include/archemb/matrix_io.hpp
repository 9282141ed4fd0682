#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace archemb {

/// Binary matrix record: magic "EPDJ", u32 row count, u32 column count,
/// one byte normalized flag, then row-major little-endian f64. Used for
/// EPDJM files, training checkpoints and encoder weights. A file may hold
/// several consecutive records (checkpoints store one record per weight
/// matrix).

void append_matrix(std::ostream& out, const Eigen::MatrixXd& m, bool normalized = false);
Eigen::MatrixXd read_matrix(std::istream& in, bool* normalized = nullptr);

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                 bool normalized = false);
Eigen::MatrixXd load_matrix(const std::filesystem::path& path, bool* normalized = nullptr);

void save_matrices(const std::filesystem::path& path, const std::vector<Eigen::MatrixXd>& ms);
std::vector<Eigen::MatrixXd> load_matrices(const std::filesystem::path& path);

}  // namespace archemb
