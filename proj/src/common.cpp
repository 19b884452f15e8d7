#include "polyflex/common.hpp"

#include <cstdio>

namespace polyflex {
namespace {

void default_warn(const std::string& message) {
  std::fprintf(stderr, "warning: %s\n", message.c_str());
}

WarnFn g_warn = &default_warn;

} // namespace

void set_warn_handler(WarnFn fn) { g_warn = fn ? fn : &default_warn; }

void warn(const std::string& message) { g_warn(message); }

} // namespace polyflex
