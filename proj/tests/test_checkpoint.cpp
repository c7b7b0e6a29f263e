#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "arith/checkpoint.hpp"

using namespace arith;

namespace fs = std::filesystem;

TEST_SUITE("checkpoint") {

TEST_CASE("parameters and optimizer state survive a round trip") {
  ModelConfig cfg;
  cfg.num_layers = 1;
  cfg.num_heads = 2;
  cfg.embed_dim = 8;
  cfg.pe_kind = PeKind::Abacus;
  cfg.seed = 9;
  auto p = init_params<float>(cfg);
  OptState opt = OptState::shaped(cfg);
  opt.step = 42;
  opt.m.tok_emb.v[3] = 0.25f;
  opt.v.tok_emb.v[3] = 0.5f;

  const fs::path path = fs::temp_directory_path() / "ckpt_roundtrip.bin";
  save_checkpoint(path, p, &opt, 42, "rngstate 123");

  CheckpointState st = load_checkpoint(path);
  CHECK(st.step == 42);
  CHECK(st.data_rng == "rngstate 123");
  REQUIRE(st.opt.has_value());
  CHECK(st.opt->step == 42);
  CHECK(st.opt->m.tok_emb.v[3] == 0.25f);
  CHECK(st.opt->v.tok_emb.v[3] == 0.5f);
  CHECK(st.params.config.pe_kind == PeKind::Abacus);
  CHECK(st.params.config.embed_dim == 8);

  std::vector<const Tensor<float>*> ta, tb;
  p.visit([&](const std::string&, Tensor<float>& t, bool) {
    ta.push_back(&t);
  });
  st.params.visit([&](const std::string&, Tensor<float>& t, bool) {
    tb.push_back(&t);
  });
  REQUIRE(ta.size() == tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) CHECK(ta[i]->v == tb[i]->v);
}

TEST_CASE("optimizer state is optional") {
  ModelConfig cfg;
  cfg.num_layers = 1;
  cfg.num_heads = 1;
  cfg.embed_dim = 4;
  auto p = init_params<float>(cfg);
  const fs::path path = fs::temp_directory_path() / "ckpt_noopt.bin";
  save_checkpoint(path, p);
  const CheckpointState st = load_checkpoint(path);
  CHECK(!st.opt.has_value());
  CHECK(st.step == 0);
}

TEST_CASE("corrupt files are rejected") {
  const fs::path path = fs::temp_directory_path() / "ckpt_bad.bin";
  {
    std::ofstream os(path, std::ios::binary);
    os << "not a checkpoint at all";
  }
  CHECK_THROWS(load_checkpoint(path));
  CHECK_THROWS(load_checkpoint(fs::temp_directory_path() / "absent.bin"));
}

TEST_CASE("truncated payloads are rejected") {
  ModelConfig cfg;
  cfg.num_layers = 1;
  cfg.num_heads = 1;
  cfg.embed_dim = 4;
  auto p = init_params<float>(cfg);
  const fs::path path = fs::temp_directory_path() / "ckpt_trunc.bin";
  save_checkpoint(path, p);
  const auto full = fs::file_size(path);
  fs::resize_file(path, full - 16);
  CHECK_THROWS(load_checkpoint(path));
}

}  // TEST_SUITE
