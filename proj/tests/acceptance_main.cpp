#include "rsq/acceptance.hpp"

int main() {
    const auto results = rsq::run_acceptance();
    return rsq::report_acceptance(results) ? 0 : 1;
}
