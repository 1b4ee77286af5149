// SPDX-License-Identifier: Apache-2.0

// Writes a synthetic raw directory that `apl convert` accepts.

#include <CLI11.hpp>
#include <iostream>

#include "apl/common/error.hpp"
#include "apl/dataset/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic CSI-like raw recordings"};
  apl::dataset::SyntheticOptions opts;
  std::string out;
  app.add_option("--out", out, "Raw output directory")->required();
  app.add_option("--samples", opts.samples);
  app.add_option("--min-length", opts.min_length);
  app.add_option("--max-length", opts.max_length);
  app.add_option("--noise", opts.noise);
  app.add_option("--seed", opts.seed);
  CLI11_PARSE(app, argc, argv);
  try {
    apl::dataset::write_raw_directory(out, apl::dataset::synthetic_recordings(opts));
  } catch (const apl::Error& e) {
    std::cerr << "error: " << apl::error_code_name(e.code()) << ": " << e.what() << '\n';
    return 1;
  }
  std::cout << "wrote " << opts.samples << " recordings to " << out << '\n';
  return 0;
}
