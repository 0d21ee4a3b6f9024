#include "suite/suite.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "core/error.hpp"
#include "pipeline/parallel.hpp"

namespace clhoi::suite {

bool SuiteReport::passed() const {
  return std::all_of(properties.begin(), properties.end(), [](const PropertyReport& p) { return p.passed == p.runs; });
}

Property injected_failure() {
  return {"inject.failure", 0.0, [](std::uint64_t seed) {
            Outcome o;
            if (seed % 7 == 3) {
              o.pass = false;
              o.error = 1.0;
              o.detail = "injected failure";
            }
            return o;
          }};
}

std::vector<Property> select_properties(const std::string& filter, bool inject_failure) {
  std::vector<std::string> terms;
  std::stringstream ss(filter);
  for (std::string t; std::getline(ss, t, ',');)
    if (!t.empty()) terms.push_back(t);
  std::vector<Property> all = registered_properties();
  if (inject_failure) all.push_back(injected_failure());
  std::vector<Property> out;
  for (const Property& p : all) {
    const bool hit = terms.empty() || std::any_of(terms.begin(), terms.end(), [&](const std::string& t) {
                       return p.name.find(t) != std::string::npos;
                     });
    if (hit) out.push_back(p);
  }
  require(!out.empty(), ErrorKind::kUsage, "filter '" + filter + "' matches no property");
  return out;
}

SuiteReport run_suite(const SuiteOptions& options) {
  return run_properties(select_properties(options.filter, options.inject_failure), options);
}

SuiteReport run_properties(const std::vector<Property>& properties, const SuiteOptions& options) {
  require(options.seed_count > 0, ErrorKind::kUsage, "seed_count must be positive");
  const std::size_t n = options.seed_count;
  std::vector<Outcome> outcomes(properties.size() * n);
  parallel_for(outcomes.size(), options.threads, [&](std::size_t i) {
    const Property& p = properties[i / n];
    const std::uint64_t seed = options.base_seed + i % n;
    try {
      outcomes[i] = p.check(seed);
    } catch (const std::exception& e) {
      outcomes[i] = {false, 0.0, std::string("exception: ") + e.what()};
    }
    if (outcomes[i].pass && !(outcomes[i].error <= p.tolerance)) {
      outcomes[i].pass = false;
      if (outcomes[i].detail.empty()) outcomes[i].detail = "error above tolerance";
    }
  });

  SuiteReport report;
  report.seed_count = n;
  report.base_seed = options.base_seed;
  for (std::size_t pi = 0; pi < properties.size(); ++pi) {
    PropertyReport r;
    r.name = properties[pi].name;
    r.tolerance = properties[pi].tolerance;
    r.runs = n;
    for (std::size_t s = 0; s < n; ++s) {
      const Outcome& o = outcomes[pi * n + s];
      r.worst_error = std::max(r.worst_error, o.error);
      if (o.pass) {
        ++r.passed;
      } else if (!r.failing_seed) {
        r.failing_seed = options.base_seed + s;
        r.failure_detail = o.detail;
      }
    }
    report.properties.push_back(std::move(r));
  }
  return report;
}

std::string suite_text(const SuiteReport& report) {
  std::ostringstream os;
  os << "seeds " << report.base_seed << ".." << report.base_seed + report.seed_count - 1 << '\n';
  os << std::left << std::setw(32) << "property" << std::setw(12) << "passed" << std::setw(14) << "worst_error"
     << std::setw(12) << "tolerance" << "status\n";
  for (const PropertyReport& p : report.properties) {
    std::ostringstream frac, worst, tol;
    frac << p.passed << '/' << p.runs;
    worst << std::scientific << std::setprecision(2) << p.worst_error;
    tol << std::scientific << std::setprecision(1) << p.tolerance;
    os << std::setw(32) << p.name << std::setw(12) << frac.str() << std::setw(14) << worst.str() << std::setw(12)
       << tol.str();
    if (p.failing_seed) {
      os << "FAIL seed " << *p.failing_seed << " (" << p.failure_detail << ")\n";
    } else {
      os << "ok\n";
    }
  }
  os << (report.passed() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

Json suite_json(const SuiteReport& report) {
  Json props = Json::array();
  for (const PropertyReport& p : report.properties) {
    props.push_back({{"name", p.name},
                     {"runs", p.runs},
                     {"passed", p.passed},
                     {"worst_error", p.worst_error},
                     {"tolerance", p.tolerance},
                     {"failing_seed", p.failing_seed ? Json(*p.failing_seed) : Json(nullptr)},
                     {"detail", p.failure_detail}});
  }
  return Json{{"seed_count", report.seed_count},
              {"base_seed", report.base_seed},
              {"properties", props},
              {"passed", report.passed()}};
}

}  // namespace clhoi::suite
