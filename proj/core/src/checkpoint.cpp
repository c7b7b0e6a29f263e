#include "arith/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <vector>

#include "arith/config.hpp"

namespace arith {
namespace {

constexpr char kMagic[8] = {'A', 'R', 'L', 'A', 'B', 'C', 'K', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

struct TensorRef {
  std::string name;
  const Tensor<float>* t;
};

std::vector<TensorRef> collect(const ParamStore<float>& store,
                               const std::string& prefix) {
  std::vector<TensorRef> out;
  const_cast<ParamStore<float>&>(store).visit(
      [&](const std::string& name, Tensor<float>& t, bool) {
        out.push_back({prefix + name, &t});
      });
  return out;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path,
                     const ParamStore<float>& params, const OptState* opt,
                     std::uint64_t step, const std::string& data_rng) {
  std::vector<TensorRef> refs = collect(params, "");
  if (opt != nullptr) {
    auto m = collect(opt->m, "opt.m.");
    auto v = collect(opt->v, "opt.v.");
    refs.insert(refs.end(), m.begin(), m.end());
    refs.insert(refs.end(), v.begin(), v.end());
  }

  nlohmann::json manifest;
  manifest["format_version"] = 1;
  manifest["model"] = model_config_to_json(params.config);
  manifest["step"] = step;
  manifest["opt_step"] = opt != nullptr ? opt->step : 0;
  manifest["has_opt"] = opt != nullptr;
  manifest["data_rng"] = data_rng;
  std::uint64_t offset = 0;
  nlohmann::json table = nlohmann::json::array();
  for (const auto& r : refs) {
    nlohmann::json e;
    e["name"] = r.name;
    e["shape"] = r.t->shape;
    e["offset"] = offset;
    offset += static_cast<std::uint64_t>(r.t->count()) * sizeof(float);
    table.push_back(e);
  }
  manifest["tensors"] = table;
  const std::string text = manifest.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os.write(kMagic, 8);
  write_u64(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& r : refs) {
    // assumes little-endian float32 host, true on every supported target
    os.write(reinterpret_cast<const char*>(r.t->data()),
             static_cast<std::streamsize>(r.t->count() * sizeof(float)));
  }
  if (!os) throw std::runtime_error("short write to " + path.string());
}

CheckpointState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("bad checkpoint magic in " + path.string());
  const std::uint64_t mlen = read_u64(is);
  std::string text(mlen, '\0');
  is.read(text.data(), static_cast<std::streamsize>(mlen));
  if (!is) throw std::runtime_error("truncated manifest in " + path.string());
  const nlohmann::json manifest = nlohmann::json::parse(text);
  if (manifest.at("format_version").get<int>() != 1)
    throw std::runtime_error("unsupported checkpoint version");

  CheckpointState st;
  const ModelConfig cfg = model_config_from_json(manifest.at("model"));
  st.params = ParamStore<float>::shaped(cfg);
  st.step = manifest.at("step").get<std::uint64_t>();
  st.data_rng = manifest.value("data_rng", std::string{});
  const bool has_opt = manifest.value("has_opt", false);
  if (has_opt) {
    st.opt = OptState::shaped(cfg);
    st.opt->step = manifest.at("opt_step").get<std::uint64_t>();
  }

  std::vector<TensorRef> refs = collect(st.params, "");
  if (st.opt) {
    auto m = collect(st.opt->m, "opt.m.");
    auto v = collect(st.opt->v, "opt.v.");
    refs.insert(refs.end(), m.begin(), m.end());
    refs.insert(refs.end(), v.begin(), v.end());
  }

  const auto& table = manifest.at("tensors");
  if (table.size() != refs.size())
    throw std::runtime_error("tensor table does not match model shape");
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& e = table.at(i);
    if (e.at("name").get<std::string>() != refs[i].name)
      throw std::runtime_error("unexpected tensor " +
                               e.at("name").get<std::string>());
    const auto shape = e.at("shape").get<std::vector<int>>();
    if (shape != refs[i].t->shape)
      throw std::runtime_error("shape mismatch for " + refs[i].name);
    is.read(reinterpret_cast<char*>(
                const_cast<float*>(refs[i].t->data())),
            static_cast<std::streamsize>(refs[i].t->count() * sizeof(float)));
    if (!is)
      throw std::runtime_error("truncated payload for " + refs[i].name);
  }
  return st;
}

}  // namespace arith
