#pragma once

#define COFU_VERSION "0.1.0"
