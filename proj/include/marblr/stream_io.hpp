#ifndef MARBLR_STREAM_IO_HPP
#define MARBLR_STREAM_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "marblr/simulator.hpp"

namespace marblr {

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// Stream CSV: `#`-prefixed provenance comments, then the exact header
/// `t,i,group,score,y,x1,...,xD`. The group column is empty when absent.
void write_stream_csv(std::ostream& os, const std::vector<SimBatch>& stream,
                      const ScenarioSpec* provenance = nullptr);

std::vector<SimBatch> read_stream_csv(std::istream& is);

}  // namespace marblr

#endif  // MARBLR_STREAM_IO_HPP
