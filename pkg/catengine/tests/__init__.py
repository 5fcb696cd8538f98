# catengine tests package
