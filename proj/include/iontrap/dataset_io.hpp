#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "iontrap/datasets.hpp"

namespace iontrap {

/// Numeric table with named columns; the common shape of every CSV we write.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;  // throws ValidationError
};

/// Header row then one line per row, full round-trip precision.
void write_csv(std::ostream& os, const Table& t);
/// Throws ValidationError on a missing header, ragged rows or non-numeric cells.
Table read_csv(std::istream& is);

// Columns: energy_nj, p_down, repetitions
Table to_table(const RabiDataset& d);
RabiDataset rabi_from_table(const Table& t);

// Columns: tau_us, detuning_hz, p_up, repetitions (detuning as ordinary frequency)
Table to_table(const FringeDataset& d);
FringeDataset fringes_from_table(const Table& t);

// Columns: tau_us, visibility, visibility_sigma
Table to_table(const std::vector<VisibilityPoint>& v);
std::vector<VisibilityPoint> visibilities_from_table(const Table& t);

}  // namespace iontrap
