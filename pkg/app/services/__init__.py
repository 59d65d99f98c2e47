# Service layer modules
