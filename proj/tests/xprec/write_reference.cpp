// Writes a double-precision checkpoint, a batch of images and the logits
// the double-precision model assigns to them.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "tenconv/checkpoint.hpp"
#include "tenconv/serialize.hpp"
#include "tenconv/training.hpp"

int main(int argc, char** argv) {
  using namespace tenconv;
  if (argc != 2) {
    std::cerr << "usage: write_reference <dir>\n";
    return 2;
  }
  const std::string dir = argv[1];
  std::filesystem::create_directories(dir);
  Model m(make_micro_tcnn(), 11);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  Tensor x(Shape{6, 1, 8, 8});
  for (Real& v : x.data()) v = u(rng);
  Adam adam;
  train_step(m, adam, x, std::vector<int>{0, 1, 2, 0, 1, 2});
  save_checkpoint(m, dir + "/reference.tcnn");
  std::ofstream out(dir + "/reference.bin", std::ios::binary | std::ios::trunc);
  write_tensor(out, x);
  write_tensor(out, m.predict(x));
  return out ? 0 : 1;
}
