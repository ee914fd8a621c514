/*
* Copyright (C) 2026 The wolbachia-release authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#ifndef WOLBACHIA_ERRORS_HPP
#define WOLBACHIA_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wolbachia
{

/// Base class of all numerical failures raised by the library.
/// Invalid arguments (bad parameters, mismatched grids) use std::invalid_argument instead.
class NumericalError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Newton iteration on the stage equations did not reach the residual tolerance.
class NewtonDivergence : public NumericalError
{
public:
    NewtonDivergence(std::size_t step, double residual)
        : NumericalError("Newton iteration failed at step " + std::to_string(step) +
                         " (residual " + std::to_string(residual) + ")")
        , m_step(step)
        , m_residual(residual)
    {
    }

    std::size_t step() const
    {
        return m_step;
    }
    double residual() const
    {
        return m_residual;
    }

private:
    std::size_t m_step;
    double m_residual;
};

/// Total population reached zero in the scaled variables (1 - eps*n <= 1e-12).
class PopulationCollapse : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

/// The parameters do not admit the unstable coexistence state, so the reduced problem has no threshold.
class NoCoexistence : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

/// M <= max(-f/g): a saturated release cannot push the frequency across the threshold.
class InsufficientFlux : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

/// T <= C/M: the horizon cannot hold the whole budget at maximal flux.
class HorizonTooShort : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

} // namespace wolbachia

#endif // WOLBACHIA_ERRORS_HPP
