#include "rucca/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "rucca/error.hpp"

namespace rucca {

namespace {

using json = nlohmann::ordered_json;

constexpr std::array<char, 8> kMagic{'R', 'U', 'C', 'C', 'A', 'M', 'D', 'L'};

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw SchemaError("checkpoint is truncated");
  return value;
}

std::string get_string(std::istream& in, std::uint64_t length) {
  if (length > (1ULL << 32)) throw SchemaError("checkpoint has an implausible block length");
  std::string s(static_cast<std::size_t>(length), '\0');
  in.read(s.data(), static_cast<std::streamsize>(length));
  if (!in) throw SchemaError("checkpoint is truncated");
  return s;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

json train_to_json(const TrainConfig& c) {
  return json{{"epochs", c.epochs},           {"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
              {"seed", c.seed},               {"clip_norm", c.clip_norm},         {"hidden", c.hidden},
              {"layers", c.layers},           {"embedding_dim", c.embedding_dim}, {"aux_weight", c.aux_weight}};
}

TrainConfig train_from_json(const json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.clip_norm = j.at("clip_norm").get<double>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  c.aux_weight = j.at("aux_weight").get<double>();
  return c;
}

json vocab_to_json(const FeatureVocabularies& v) {
  json tables = json::array();
  for (const auto& t : v.tables) {
    std::vector<std::string> symbols(t.symbols.symbols().begin() + 2, t.symbols.symbols().end());
    tables.push_back(json{{"name", t.name}, {"dim", t.dim}, {"symbols", symbols}});
  }
  return json{{"tables", tables}, {"morph_keys", v.morph_keys}, {"aux_labels", v.aux_labels}};
}

FeatureVocabularies vocab_from_json(const json& j) {
  FeatureVocabularies v;
  for (const auto& t : j.at("tables")) {
    v.tables.push_back(FeatureTable{t.at("name").get<std::string>(),
                                    SymbolTable::from_symbols(t.at("symbols").get<std::vector<std::string>>()),
                                    t.at("dim").get<std::size_t>()});
  }
  v.morph_keys = j.at("morph_keys").get<std::vector<std::string>>();
  v.aux_labels = j.at("aux_labels").get<std::vector<std::string>>();
  return v;
}

}  // namespace

void write_model(const TaggerModel& model, std::ostream& out) {
  model.params.check();
  const json meta{{"format", "rucca-model"},
                  {"version", kCheckpointVersion},
                  {"hidden", model.params.hidden},
                  {"layers", model.params.layers.size()},
                  {"train", train_to_json(model.config)},
                  {"vocab", vocab_to_json(model.vocab)},
                  {"embeddings", {{"rows", model.embedding_rows}, {"fingerprint", hex(model.embedding_fingerprint)}}}};
  const std::string text = meta.dump();

  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));

  const auto names = model.params.tensor_names();
  const auto tensors = model.params.tensors();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    put<std::uint64_t>(out, names[i].size());
    out.write(names[i].data(), static_cast<std::streamsize>(names[i].size()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(tensors[i]->rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(tensors[i]->cols()));
    out.write(reinterpret_cast<const char*>(tensors[i]->data()),
              static_cast<std::streamsize>(tensors[i]->size() * static_cast<Eigen::Index>(sizeof(double))));
  }
  if (!out) throw IoError("failed writing checkpoint");
}

TaggerModel read_model(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw SchemaError("not a model checkpoint");
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw ConfigError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  json meta;
  try {
    meta = json::parse(get_string(in, get<std::uint64_t>(in)));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("checkpoint metadata is corrupt: ") + e.what());
  }

  TaggerModel model;
  try {
    model.config = train_from_json(meta.at("train"));
    model.vocab = vocab_from_json(meta.at("vocab"));
    model.embedding_rows = meta.at("embeddings").at("rows").get<std::size_t>();
    model.embedding_fingerprint = std::stoull(meta.at("embeddings").at("fingerprint").get<std::string>(), nullptr, 16);
    model.params = init_params(model.vocab, meta.at("hidden").get<std::size_t>(), 0,
                               meta.at("layers").get<std::size_t>());
  } catch (const json::exception& e) {
    throw SchemaError(std::string("checkpoint metadata is incomplete: ") + e.what());
  }

  const auto names = model.params.tensor_names();
  auto tensors = model.params.tensors();
  const auto count = get<std::uint32_t>(in);
  if (count != tensors.size()) throw SchemaError("checkpoint tensor count does not match its metadata");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const std::string name = get_string(in, get<std::uint64_t>(in));
    const auto rows = get<std::uint64_t>(in);
    const auto cols = get<std::uint64_t>(in);
    if (name != names[i] || rows != static_cast<std::uint64_t>(tensors[i]->rows()) ||
        cols != static_cast<std::uint64_t>(tensors[i]->cols())) {
      throw SchemaError("checkpoint tensor " + name + " does not match the expected layout (" + names[i] + ")");
    }
    in.read(reinterpret_cast<char*>(tensors[i]->data()),
            static_cast<std::streamsize>(tensors[i]->size() * static_cast<Eigen::Index>(sizeof(double))));
    if (!in) throw SchemaError("checkpoint is truncated");
  }
  model.params.check();
  return model;
}

void save_model(const TaggerModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_model(model, out);
}

TaggerModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return read_model(in);
}

void check_embeddings(const TaggerModel& model, const WordEmbeddingTable& embeddings) {
  if (embeddings.size() != model.embedding_rows || embeddings.fingerprint() != model.embedding_fingerprint) {
    throw ConfigError("word embeddings do not match the checkpoint (" + std::to_string(embeddings.size()) +
                      " rows loaded, " + std::to_string(model.embedding_rows) + " expected)");
  }
}

}  // namespace rucca
