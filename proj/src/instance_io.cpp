#include "halpern/errors.hpp"
#include "halpern/instances.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace halpern {

namespace {

using json = nlohmann::json;

constexpr int kSchemaVersion = 1;

json to_json_vec(const Vector& v) {
  json a = json::array();
  for (Index j = 0; j < v.size(); ++j) a.push_back(v(j));
  return a;
}

json to_json_mat(const Matrix& m) {
  json a = json::array();
  for (Index i = 0; i < m.rows(); ++i) a.push_back(to_json_vec(m.row(i).transpose()));
  return a;
}

json body_to_json(const ConvexBody& body) {
  if (const auto* h = body.get_if<Halfspace>()) {
    return {{"type", "halfspace"}, {"normal", to_json_vec(h->normal())}, {"offset", h->offset()}};
  }
  if (const auto* p = body.get_if<Polyhedron>()) {
    return {{"type", "polyhedron"}, {"rows", to_json_mat(p->rows())}, {"rhs", to_json_vec(p->rhs())}};
  }
  if (const auto* e = body.get_if<Ellipsoid>()) {
    return {{"type", "ellipsoid"},
            {"center", to_json_vec(e->center())},
            {"shape", to_json_mat(e->shape())},
            {"radius", e->radius()}};
  }
  if (const auto* b = body.get_if<Ball>()) {
    return {{"type", "ball"}, {"center", to_json_vec(b->center())}, {"radius", b->radius()}};
  }
  throw InputError("instance_to_json: cannot serialize body kind " + std::string(body.kind_name()));
}

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw InputError("instance schema error at " + where + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) schema_error(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(where, std::string("missing field '") + key + "'");
  return *it;
}

double read_real(const json& j, const std::string& where) {
  if (!j.is_number()) schema_error(where, "expected a number");
  return j.get<double>();
}

Index read_index(const json& j, const std::string& where) {
  if (!j.is_number_integer()) schema_error(where, "expected an integer");
  return j.get<Index>();
}

Vector read_vec(const json& j, const std::string& where) {
  if (!j.is_array()) schema_error(where, "expected an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = read_real(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

Matrix read_mat(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) schema_error(where, "expected a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    const Vector row = read_vec(j[i], w);
    if (static_cast<std::size_t>(row.size()) != cols) schema_error(w, "ragged matrix row");
    m.row(static_cast<Index>(i)) = row.transpose();
  }
  return m;
}

ConvexBody body_from_json(const json& j, const std::string& where) {
  const json& type = field(j, "type", where);
  if (!type.is_string()) schema_error(where + ".type", "expected a string");
  const std::string t = type.get<std::string>();
  try {
    if (t == "halfspace") {
      return Halfspace(read_vec(field(j, "normal", where), where + ".normal"),
                       read_real(field(j, "offset", where), where + ".offset"));
    }
    if (t == "polyhedron") {
      return Polyhedron(read_mat(field(j, "rows", where), where + ".rows"),
                        read_vec(field(j, "rhs", where), where + ".rhs"));
    }
    if (t == "ellipsoid") {
      return Ellipsoid(read_vec(field(j, "center", where), where + ".center"),
                       read_mat(field(j, "shape", where), where + ".shape"),
                       read_real(field(j, "radius", where), where + ".radius"));
    }
    if (t == "ball") {
      return Ball(read_vec(field(j, "center", where), where + ".center"),
                  read_real(field(j, "radius", where), where + ".radius"));
    }
  } catch (const InstanceError& e) {
    schema_error(where, e.what());
  }
  schema_error(where + ".type", "unknown body type '" + t + "'");
}

}  // namespace

std::string instance_to_json(const Instance& inst) {
  json j;
  j["version"] = kSchemaVersion;
  j["family"] = inst.family;
  j["m"] = inst.m;
  j["n"] = inst.n;
  j["k"] = inst.k;
  j["theta"] = inst.theta;
  j["alpha"] = inst.alpha;
  j["seed"] = inst.seed;
  json bodies = json::array();
  for (const auto& b : inst.bodies) bodies.push_back(body_to_json(b));
  j["bodies"] = std::move(bodies);
  j["anchor"] = to_json_vec(inst.anchor);
  if (inst.reference) {
    j["reference"] = {{"point", to_json_vec(inst.reference->point)},
                      {"certified_tol", inst.reference->certified_tol}};
  } else {
    j["reference"] = nullptr;
  }
  if (inst.witness) j["witness"] = to_json_vec(*inst.witness);
  return j.dump(1) + "\n";
}

Instance instance_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("instance parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  const std::string root = "$";
  const json& version = field(j, "version", root);
  if (!version.is_number_integer() || version.get<long>() != kSchemaVersion) {
    schema_error(root + ".version", "unsupported schema version " + version.dump() + " (expected 1)");
  }

  Instance inst;
  const json& family = field(j, "family", root);
  if (!family.is_string()) schema_error(root + ".family", "expected a string");
  inst.family = family.get<std::string>();
  inst.m = read_index(field(j, "m", root), root + ".m");
  inst.n = read_index(field(j, "n", root), root + ".n");
  inst.k = read_index(field(j, "k", root), root + ".k");
  inst.theta = read_real(field(j, "theta", root), root + ".theta");
  inst.alpha = read_real(field(j, "alpha", root), root + ".alpha");
  const json& seed = field(j, "seed", root);
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
    schema_error(root + ".seed", "expected a nonnegative integer");
  }
  inst.seed = seed.get<std::uint64_t>();

  const json& bodies = field(j, "bodies", root);
  if (!bodies.is_array() || bodies.empty()) schema_error(root + ".bodies", "expected a nonempty array");
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    inst.bodies.push_back(body_from_json(bodies[i], root + ".bodies[" + std::to_string(i) + "]"));
  }
  inst.anchor = read_vec(field(j, "anchor", root), root + ".anchor");

  if (static_cast<Index>(inst.bodies.size()) != inst.m) schema_error(root + ".m", "does not match body count");
  if (inst.anchor.size() != inst.n) schema_error(root + ".anchor", "length differs from n");
  for (std::size_t i = 0; i < inst.bodies.size(); ++i) {
    if (inst.bodies[i].dim() != inst.n) {
      schema_error(root + ".bodies[" + std::to_string(i) + "]", "dimension differs from n");
    }
  }

  const json& ref = field(j, "reference", root);
  if (!ref.is_null()) {
    ReferenceSolution r;
    r.point = read_vec(field(ref, "point", root + ".reference"), root + ".reference.point");
    r.certified_tol = read_real(field(ref, "certified_tol", root + ".reference"), root + ".reference.certified_tol");
    if (r.point.size() != inst.n) schema_error(root + ".reference.point", "length differs from n");
    inst.reference = std::move(r);
  }
  if (const auto it = j.find("witness"); it != j.end()) {
    inst.witness = read_vec(*it, root + ".witness");
    if (inst.witness->size() != inst.n) schema_error(root + ".witness", "length differs from n");
  }
  return inst;
}

void save_instance(const Instance& instance, const std::filesystem::path& path) {
  const std::string text = instance_to_json(instance);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return instance_from_json(buf.str());
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace halpern
