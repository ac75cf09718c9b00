#include "marblr/stream_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace marblr {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

const char* shift_name(ShiftKind k) {
  switch (k) {
    case ShiftKind::InitialShift: return "initial";
    case ShiftKind::Cyclical: return "cyclical";
    case ShiftKind::Decay: return "decay";
  }
  return "?";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_stream_csv(std::ostream& os, const std::vector<SimBatch>& stream,
                      const ScenarioSpec* spec) {
  const int d_x = stream.empty() ? 0 : static_cast<int>(stream.front().x.cols());
  if (spec != nullptr) {
    os << "# scenario=" << spec->scenario << " shift=" << shift_name(spec->shift)
       << " T=" << spec->T << " n=" << spec->n << " d_x=" << spec->d_x
       << " seed=" << spec->seed << "\n";
    os << "# drift:";
    for (const auto& [k, v] : default_drift_params()) {
      os << " " << k << "=" << format_double(spec->param(k));
    }
    os << "\n";
  }
  os << "t,i,group,score,y";
  for (int j = 1; j <= d_x; ++j) os << ",x" << j;
  os << "\n";
  int t = 1;
  for (const auto& batch : stream) {
    for (Eigen::Index i = 0; i < batch.y.size(); ++i) {
      os << t << "," << (i + 1) << ",";
      if (!batch.group.empty()) os << batch.group[i];
      os << "," << format_double(batch.original_score[i]) << ","
         << static_cast<int>(batch.y[i]);
      for (int j = 0; j < d_x; ++j) os << "," << format_double(batch.x(i, j));
      os << "\n";
    }
    ++t;
  }
}

std::vector<SimBatch> read_stream_csv(std::istream& is) {
  std::string line;
  bool header_seen = false;
  int d_x = 0;
  struct Row {
    int t;
    int group;
    bool has_group;
    double score;
    double y;
    std::vector<double> x;
  };
  std::vector<Row> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      const auto cols = split_csv(line);
      if (cols.size() < 5 || cols[0] != "t") {
        throw std::runtime_error("stream csv: unexpected header");
      }
      d_x = static_cast<int>(cols.size()) - 5;
      header_seen = true;
      continue;
    }
    const auto cols = split_csv(line);
    if (cols.size() != static_cast<size_t>(5 + d_x)) {
      throw std::runtime_error("stream csv: bad row width");
    }
    Row r;
    r.t = std::stoi(cols[0]);
    r.has_group = !cols[2].empty();
    r.group = r.has_group ? std::stoi(cols[2]) : -1;
    r.score = std::stod(cols[3]);
    r.y = std::stod(cols[4]);
    r.x.resize(d_x);
    for (int j = 0; j < d_x; ++j) r.x[j] = std::stod(cols[5 + j]);
    rows.push_back(std::move(r));
  }
  std::vector<SimBatch> stream;
  size_t i = 0;
  while (i < rows.size()) {
    size_t j = i;
    while (j < rows.size() && rows[j].t == rows[i].t) ++j;
    const int n = static_cast<int>(j - i);
    SimBatch batch;
    batch.x = Matrix(n, d_x);
    batch.true_prob = Vector::Zero(n);  // unknown on replay
    batch.y = Vector(n);
    batch.original_score = Vector(n);
    if (rows[i].has_group) batch.group.resize(n);
    for (int k = 0; k < n; ++k) {
      const Row& r = rows[i + k];
      for (int c = 0; c < d_x; ++c) batch.x(k, c) = r.x[c];
      batch.y[k] = r.y;
      batch.original_score[k] = r.score;
      if (r.has_group) batch.group[k] = r.group;
    }
    batch.y_refit = batch.y;
    stream.push_back(std::move(batch));
    i = j;
  }
  return stream;
}

}  // namespace marblr
