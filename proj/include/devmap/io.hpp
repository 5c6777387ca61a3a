#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace devmap {

// Shortest decimal form with 17 significant digits; round-trips doubles.
std::string format_double(double v);

// Minimal JSON emission. Values are preformatted JSON fragments; the
// composers produce compact single-line documents.
std::string json_number(double v);
std::string json_string(const std::string& s);
std::string json_array(const std::vector<std::string>& items);
std::string json_object(const std::vector<std::pair<std::string, std::string>>& fields);
std::string json_vector(const Eigen::VectorXd& v);

} // namespace devmap
