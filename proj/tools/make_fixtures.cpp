// Writes a synthetic face corpus (frames, landmarks.json, manifest.json)
// for trying the pipeline without real data.
#include <iostream>

#include <CLI11.hpp>

#include "blendforge/error.hpp"
#include "blendforge/fixtures.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic fixture corpus generator", "make_fixtures"};
  std::string out;
  int videos = 25;
  int frames = 2;
  std::uint64_t seed = 7;
  int size = 256;
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--videos", videos, "Number of videos")->check(CLI::PositiveNumber);
  app.add_option("--frames", frames, "Frames per video")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Corpus seed");
  app.add_option("--size", size, "Frame side length")->check(CLI::Range(32, 4096));
  CLI11_PARSE(app, argc, argv);
  try {
    const auto corpus = blendforge::write_fixture_corpus(out, videos, frames, seed, size, size);
    std::cout << "wrote " << corpus.manifest.records.size() << " frames to " << out << '\n';
  } catch (const blendforge::Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
