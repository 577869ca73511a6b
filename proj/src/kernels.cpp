#include "tensorcore/kernels.hpp"

namespace tc {

CgForm parse_cg_form(const std::string& name) {
  if (name == "direct") return CgForm::direct;
  if (name == "normal") return CgForm::normal;
  throw std::invalid_argument("unknown CG form: " + name + " (expected direct or normal)");
}

CgVariant parse_cg_variant(const std::string& name) {
  if (name == "paper") return CgVariant::paper;
  if (name == "standard") return CgVariant::standard;
  throw std::invalid_argument("unknown CG variant: " + name + " (expected paper or standard)");
}

std::string to_string(CgForm form) { return form == CgForm::direct ? "direct" : "normal"; }

std::string to_string(CgVariant variant) { return variant == CgVariant::paper ? "paper" : "standard"; }

}  // namespace tc
