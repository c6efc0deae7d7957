#pragma once

#define VMFC_VERSION "0.1.0"
