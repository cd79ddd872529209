#ifndef ERSDP_IO_HPP_
#define ERSDP_IO_HPP_

#include "ersdp/linop.hpp"

#include <string>
#include <vector>

namespace ersdp {

/// Round-trip text for a double: 17 significant digits, "nan" / "inf" / "-inf".
std::string format_double(double v);

/// Raw little-endian float64 array.
void write_f64_le(const std::string& path, const std::vector<double>& values);
std::vector<double> read_f64_le(const std::string& path);

/// n rows, one comma-separated row of M per line, preceded by `# key=value` lines.
void write_matrix_csv(const std::string& path, const MatrixXd& M,
                      const std::vector<std::pair<std::string, std::string>>& header = {});

}  // namespace ersdp

#endif  // ERSDP_IO_HPP_
