#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "ev2r/error.hpp"
#include "ev2r/log.hpp"
#include "ev2r/metaeval.hpp"

namespace ev2r::metaeval {
namespace {

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  // ".306" / "-.089" as in published correlation tables
  if (s.rfind("0.", 0) == 0) s.erase(0, 1);
  else if (s.rfind("-0.", 0) == 0) s.erase(1, 1);
  return s;
}

nlohmann::json test_json(const std::optional<CorrelationTest>& t) {
  if (!t) return nullptr;
  return {{"value", t->coefficient},
          {"p_value", t->p_value},
          {"n", t->n},
          {"p_method", to_string(t->method)}};
}

struct Target {
  std::map<std::string, double> values;
  std::string note;
};

Target build_target(std::span<const RatingRecord> ratings, const std::string& dimension,
                    ValueKind kind, const CorrelateOptions& options) {
  Target t;
  if (kind == ValueKind::numeric) {
    t.values = aggregate_numeric(ratings, dimension);
    return t;
  }
  if (options.reference_labels == nullptr) {
    t.note = "categorical dimension needs reference labels";
    return t;
  }
  for (const auto& [id, label] : aggregate_categorical(ratings, dimension)) {
    auto ref = options.reference_labels->find(id);
    if (ref == options.reference_labels->end()) continue;
    try {
      t.values[id] = map_label(label, ref->second.space) == ref->second ? 1.0 : 0.0;
    } catch (const Error& e) {
      log::warn("verdict rating for '" + id + "' skipped: " + e.what());
    }
  }
  return t;
}

}  // namespace

const CorrelationCell* CorrelationReport::cell(std::string_view scorer,
                                               std::string_view dimension) const {
  for (const auto& c : cells) {
    if (c.scorer == scorer && c.dimension == dimension) return &c;
  }
  return nullptr;
}

CorrelationReport correlate_report(std::span<const ScoreRow> scores,
                                   std::span<const RatingRecord> ratings,
                                   const DimensionRegistry& registry,
                                   const CorrelateOptions& options) {
  std::map<std::string, std::map<std::string, double>> by_scorer;
  for (const auto& row : scores) by_scorer[row.scorer][row.instance_id] = row.score;

  std::map<std::string, ValueKind> dims;
  for (const auto& r : ratings) {
    const Dimension* d = registry.find(r.dimension);
    dims.emplace(r.dimension,
                 d ? d->kind : (r.is_numeric() ? ValueKind::numeric : ValueKind::categorical));
  }

  CorrelationReport report;
  std::map<std::string, Target> targets;
  for (const auto& [name, kind] : dims) {
    report.dimensions.push_back(name);
    targets[name] = build_target(ratings, name, kind, options);
  }
  for (const auto& [name, rows] : by_scorer) report.scorers.push_back(name);

  bool joined = false;
  for (const auto& [scorer, rows] : by_scorer) {
    for (const auto& [dim, target] : targets) {
      for (const auto& [id, v] : target.values) {
        if (rows.count(id)) joined = true;
      }
    }
  }
  if (!joined) throw Error(ErrorKind::EmptyJoin, "no instance id shared by scores and ratings");

  for (const auto& scorer : report.scorers) {
    for (const auto& dim : report.dimensions) report.cells.push_back({scorer, dim, 0, {}, {}, {}});
  }

  const auto n_cells = static_cast<std::ptrdiff_t>(report.cells.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n_cells; ++i) {
    CorrelationCell& cell = report.cells[static_cast<std::size_t>(i)];
    const Target& target = targets.at(cell.dimension);
    if (!target.note.empty()) {
      cell.note = target.note;
      continue;
    }
    const auto& rows = by_scorer.at(cell.scorer);
    std::vector<double> x, y;
    for (const auto& [id, human] : target.values) {
      auto it = rows.find(id);
      if (it == rows.end()) continue;
      x.push_back(it->second);
      y.push_back(human);
    }
    cell.n = x.size();
    if (cell.n < 3) {
      cell.note = "fewer than 3 joined instances";
      continue;
    }
    try {
      cell.spearman = spearman(x, y);
      cell.pearson = pearson(x, y);
    } catch (const Error& e) {
      cell.spearman.reset();
      cell.pearson.reset();
      cell.note = e.kind() == ErrorKind::ZeroVariance ? "zero variance" : e.what();
    }
  }
  return report;
}

nlohmann::json CorrelationReport::to_json() const {
  nlohmann::json cells_json = nlohmann::json::array();
  for (const auto& c : cells) {
    nlohmann::json j{{"scorer", c.scorer},
                     {"dimension", c.dimension},
                     {"n", c.n},
                     {"spearman", test_json(c.spearman)},
                     {"pearson", test_json(c.pearson)}};
    if (!c.note.empty()) j["note"] = c.note;
    cells_json.push_back(std::move(j));
  }
  return {{"scorers", scorers}, {"dimensions", dimensions}, {"cells", cells_json}};
}

std::string CorrelationReport::to_table() const {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"scorer"};
  for (const auto& d : dimensions) {
    header.push_back(d + " rho");
    header.push_back(d + " r");
  }
  rows.push_back(header);
  for (const auto& s : scorers) {
    std::vector<std::string> row{s};
    for (const auto& d : dimensions) {
      const CorrelationCell* c = cell(s, d);
      row.push_back(c && c->spearman ? fmt3(c->spearman->coefficient) : "-");
      row.push_back(c && c->pearson ? fmt3(c->pearson->coefficient) : "-");
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::ostringstream out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t i = 0; i < rows[r].size(); ++i) {
      if (i) out << "  ";
      if (i == 0) out << std::left << std::setw(static_cast<int>(width[i])) << rows[r][i];
      else out << std::right << std::setw(static_cast<int>(width[i])) << rows[r][i];
    }
    out << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w + 2;
      out << std::string(total - 2, '-') << '\n';
    }
  }
  return out.str();
}

nlohmann::json agreement_report(std::span<const RatingRecord> ratings,
                                const DimensionRegistry& registry) {
  std::map<std::string, std::vector<const RatingRecord*>> by_dim;
  for (const auto& r : ratings) by_dim[r.dimension].push_back(&r);

  nlohmann::json out = nlohmann::json::object();
  for (const auto& [dim, recs] : by_dim) {
    const Dimension* d = registry.find(dim);
    const bool categorical =
        d ? d->kind == ValueKind::categorical : !recs.front()->is_numeric();
    nlohmann::json j{{"kind", categorical ? "categorical" : "numeric"}, {"n_ratings", recs.size()}};

    std::set<std::string> items;
    for (const auto* r : recs) items.insert(r->instance_id);
    j["n_items"] = items.size();

    std::vector<ReliabilityValue> values;
    if (categorical) {
      std::map<std::string, std::size_t> codes;
      for (const auto* r : recs) {
        if (!r->is_numeric()) codes.emplace(std::get<std::string>(r->value), 0);
      }
      std::size_t next = 0;
      for (auto& [label, code] : codes) code = next++;
      std::map<std::string, std::vector<std::size_t>> per_item;
      for (const auto* r : recs) {
        if (r->is_numeric()) continue;
        const std::size_t code = codes.at(std::get<std::string>(r->value));
        values.push_back({r->instance_id, r->annotator_id, static_cast<double>(code)});
        auto& row = per_item[r->instance_id];
        row.resize(codes.size(), 0);
        ++row[code];
      }
      // Fleiss needs a fixed rater count: use the most common one.
      std::map<std::size_t, std::size_t> rater_hist;
      for (const auto& [id, row] : per_item) {
        std::size_t n = 0;
        for (auto c : row) n += c;
        ++rater_hist[n];
      }
      std::size_t modal = 0, modal_count = 0;
      for (const auto& [n, c] : rater_hist) {
        if (c > modal_count) {
          modal = n;
          modal_count = c;
        }
      }
      std::vector<std::vector<std::size_t>> table;
      for (const auto& [id, row] : per_item) {
        std::size_t n = 0;
        for (auto c : row) n += c;
        if (n == modal) table.push_back(row);
      }
      j["fleiss_items_used"] = table.size();
      try {
        j["fleiss_kappa"] = fleiss_kappa(table);
      } catch (const Error& e) {
        j["fleiss_kappa"] = nullptr;
        j["fleiss_error"] = e.what();
      }
    } else {
      for (const auto* r : recs) {
        if (r->is_numeric()) {
          values.push_back({r->instance_id, r->annotator_id, std::get<double>(r->value)});
        }
      }
      const StdSummary s = rating_std(ratings, dim);
      j["std_mean"] = s.mean_std;
      j["std_items"] = s.items.size();
      j["std_excluded"] = s.excluded;
    }
    try {
      j["krippendorff_alpha"] = krippendorff_alpha(
          values, categorical ? MeasurementLevel::nominal : MeasurementLevel::interval);
      j["alpha_level"] = categorical ? "nominal" : "interval";
    } catch (const Error& e) {
      j["krippendorff_alpha"] = nullptr;
      j["alpha_error"] = e.what();
    }
    out[dim] = std::move(j);
  }
  return out;
}

std::string agreement_table(const nlohmann::json& report) {
  std::ostringstream out;
  out << std::left << std::setw(20) << "dimension" << std::setw(14) << "measure" << "value\n";
  out << std::string(44, '-') << '\n';
  auto line = [&](const std::string& dim, const char* measure, const nlohmann::json& v) {
    out << std::left << std::setw(20) << dim << std::setw(14) << measure;
    if (v.is_number()) out << std::fixed << std::setprecision(3) << v.get<double>();
    else out << "-";
    out << '\n';
  };
  for (const auto& [dim, j] : report.items()) {
    if (j.value("kind", "") == "categorical") {
      line(dim, "fleiss-kappa", j.value("fleiss_kappa", nlohmann::json()));
      line(dim, "kripp-alpha", j.value("krippendorff_alpha", nlohmann::json()));
    } else {
      line(dim, "std", j.value("std_mean", nlohmann::json()));
      line(dim, "kripp-alpha", j.value("krippendorff_alpha", nlohmann::json()));
    }
  }
  return out.str();
}

}  // namespace ev2r::metaeval
