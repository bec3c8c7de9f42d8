#pragma once

#include <string>

namespace ranklab {

/// Shortest "%.{15,16,17}g" rendering that round-trips to the same double.
std::string format_number(double value);

/// Fixed 17-significant-digit rendering used in CSV output.
std::string format_csv_number(double value);

}  // namespace ranklab
