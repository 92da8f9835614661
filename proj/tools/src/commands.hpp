// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <string>
#include <vector>

namespace hvacdr::tools {

// Parsed command line. Unset numeric overrides stay NaN / -1.
struct Options {
  std::vector<std::string> argv;
  std::string config, out, data, models, scenario, corpus, meta, date, oracle;
  long long seed = -1;
  int jobs = 1;
  double gap = std::numeric_limits<double>::quiet_NaN();
  double time_limit = std::numeric_limits<double>::quiet_NaN();
  long node_limit = -1;
  double on_peak = 1.0;
  bool export_lp = false;
};

int cmd_simulate(const Options& o);
int cmd_scenario(const Options& o);
int cmd_train(const Options& o);
int cmd_select(const Options& o);
int cmd_schedule(const Options& o);
int cmd_corpus(const Options& o);
int cmd_slamp(const Options& o);
int cmd_predict(const Options& o);
int cmd_compare(const Options& o);

}  // namespace hvacdr::tools
